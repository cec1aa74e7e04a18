#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attackmap/kernels.hpp"
#include "attackmap/rng.hpp"
#include "models.hpp"

namespace attackmap::learn {

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden, std::size_t classes)
    : inputs_(inputs),
      hidden_(hidden),
      classes_(classes),
      params_(hidden * inputs + hidden + classes * hidden + classes, 0.0) {}

void MlpNetwork::initialize(std::uint64_t seed) {
    Rng rng(seed);
    double* p = params_.data();
    const double bound1 = std::sqrt(6.0 / static_cast<double>(inputs_ + hidden_));
    for (std::size_t i = 0; i < hidden_ * inputs_ + hidden_; ++i) *p++ = rng.uniform(-bound1, bound1);
    const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden_ + classes_));
    for (std::size_t i = 0; i < classes_ * hidden_ + classes_; ++i) *p++ = rng.uniform(-bound2, bound2);
}

namespace {

struct Layout {
    std::size_t w1, b1, w2, b2;
};

Layout layout(std::size_t inputs, std::size_t hidden, std::size_t classes) {
    const std::size_t w1 = 0;
    const std::size_t b1 = w1 + hidden * inputs;
    const std::size_t w2 = b1 + hidden;
    const std::size_t b2 = w2 + classes * hidden;
    return {w1, b1, w2, b2};
}

// Hidden activations and log-probabilities for one row.
void forward_row(std::span<const double> params, const Layout& at, std::size_t inputs, std::size_t hidden,
                 std::size_t classes, std::span<const double> x, std::span<double> h, std::span<double> log_p) {
    for (std::size_t j = 0; j < hidden; ++j) {
        const double z = kernels::dot(params.subspan(at.w1 + j * inputs, inputs), x) + params[at.b1 + j];
        h[j] = z > 0.0 ? z : 0.0;
    }
    double max_logit = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) {
        log_p[c] = kernels::dot(params.subspan(at.w2 + c * hidden, hidden), h) + params[at.b2 + c];
        max_logit = std::max(max_logit, log_p[c]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += std::exp(log_p[c] - max_logit);
    const double log_total = max_logit + std::log(total);
    for (std::size_t c = 0; c < classes; ++c) log_p[c] -= log_total;
}

}  // namespace

double MlpNetwork::loss(const DenseMatrix& x, std::span<const int> y, double alpha, std::vector<double>* gradient) const {
    const Layout at = layout(inputs_, hidden_, classes_);
    const std::size_t n = x.rows();
    if (gradient != nullptr) gradient->assign(params_.size(), 0.0);
    std::vector<double> h(hidden_);
    std::vector<double> log_p(classes_);
    std::vector<double> delta_out(classes_);
    std::vector<double> delta_hidden(hidden_);

    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        forward_row(params_, at, inputs_, hidden_, classes_, row, h, log_p);
        const auto target = static_cast<std::size_t>(y[r]);
        total -= log_p[target];
        if (gradient == nullptr) continue;

        auto& g = *gradient;
        for (std::size_t c = 0; c < classes_; ++c) {
            delta_out[c] = (std::exp(log_p[c]) - (c == target ? 1.0 : 0.0)) * inv_n;
            kernels::axpy(delta_out[c], h, std::span<double>(g).subspan(at.w2 + c * hidden_, hidden_));
            g[at.b2 + c] += delta_out[c];
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
            if (h[j] <= 0.0) continue;
            double d = 0.0;
            for (std::size_t c = 0; c < classes_; ++c) d += delta_out[c] * params_[at.w2 + c * hidden_ + j];
            kernels::axpy(d, row, std::span<double>(g).subspan(at.w1 + j * inputs_, inputs_));
            g[at.b1 + j] += d;
        }
    }

    double weight_sq = 0.0;
    for (std::size_t i = at.w1; i < at.b1; ++i) weight_sq += params_[i] * params_[i];
    for (std::size_t i = at.w2; i < at.b2; ++i) weight_sq += params_[i] * params_[i];
    if (gradient != nullptr) {
        auto& g = *gradient;
        for (std::size_t i = at.w1; i < at.b1; ++i) g[i] += alpha * inv_n * params_[i];
        for (std::size_t i = at.w2; i < at.b2; ++i) g[i] += alpha * inv_n * params_[i];
    }
    return total * inv_n + 0.5 * alpha * inv_n * weight_sq;
}

DenseMatrix MlpNetwork::forward(const DenseMatrix& x) const {
    const Layout at = layout(inputs_, hidden_, classes_);
    DenseMatrix out(x.rows(), classes_);
    std::vector<double> h(hidden_);
    std::vector<double> log_p(classes_);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward_row(params_, at, inputs_, hidden_, classes_, x.row(r), h, log_p);
        for (std::size_t c = 0; c < classes_; ++c) out(r, c) = std::exp(log_p[c]);
    }
    return out;
}

namespace detail {

namespace {

class MlpModel final : public ClassifierModel {
public:
    MlpModel(std::vector<int> classes, MlpNetwork network, std::size_t epochs)
        : ClassifierModel(std::move(classes), network.inputs()), network_(std::move(network)), epochs_(epochs) {}

    Algorithm algorithm() const override { return Algorithm::mlp; }

    std::string dump_json() const override {
        nlohmann::json j;
        j["algorithm"] = "mlp";
        j["classes"] = class_labels();
        j["hidden"] = network_.hidden();
        j["epochs"] = epochs_;
        j["parameters"] = std::vector<double>(network_.parameters().begin(), network_.parameters().end());
        return j.dump();
    }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override { return network_.forward(x.to_dense()); }

private:
    MlpNetwork network_;
    std::size_t epochs_;
};

DenseMatrix gather_rows(const DenseMatrix& x, std::span<const std::size_t> rows) {
    DenseMatrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) std::ranges::copy(x.row(rows[i]), out.row(i).begin());
    return out;
}

}  // namespace

std::unique_ptr<ClassifierModel> fit_mlp(const FeatureMatrix& x, EncodedLabels labels, const MlpParams& params,
                                         std::uint64_t seed, const ValidationSet& validation) {
    const DenseMatrix data = x.to_dense();
    const std::size_t n = data.rows();
    MlpNetwork network(data.cols(), params.hidden_units, labels.classes.size());
    network.initialize(mix_seed(seed, "init"));
    Rng shuffle_rng(mix_seed(seed, "shuffle"));

    // Validation rows whose label was not seen in training cannot be scored.
    DenseMatrix val_x;
    std::vector<int> val_y;
    if (validation.x != nullptr) {
        const DenseMatrix all = validation.x->to_dense();
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < all.rows(); ++r) {
            const auto it = std::lower_bound(labels.classes.begin(), labels.classes.end(), validation.y[r]);
            if (it != labels.classes.end() && *it == validation.y[r]) {
                keep.push_back(r);
                val_y.push_back(static_cast<int>(it - labels.classes.begin()));
            }
        }
        val_x = gather_rows(all, keep);
    }
    const bool use_validation = !val_y.empty();

    const std::size_t batch = std::max<std::size_t>(1, std::min(params.batch_size, n));
    const auto param_count = network.parameters().size();
    std::vector<double> m(param_count, 0.0);
    std::vector<double> v(param_count, 0.0);
    std::vector<double> grad;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double best_loss = INFINITY;
    std::vector<double> best_params;
    std::size_t stale = 0;
    std::size_t step = 0;
    std::size_t epoch = 0;
    for (; epoch < params.max_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            const DenseMatrix bx = gather_rows(data, rows);
            std::vector<int> by(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) by[i] = labels.index[rows[i]];

            epoch_loss += network.loss(bx, by, params.alpha, &grad) * static_cast<double>(rows.size());
            ++step;
            const double correction = std::sqrt(1.0 - std::pow(params.beta2, static_cast<double>(step))) /
                                      (1.0 - std::pow(params.beta1, static_cast<double>(step)));
            auto p = network.parameters();
            for (std::size_t i = 0; i < param_count; ++i) {
                m[i] = params.beta1 * m[i] + (1.0 - params.beta1) * grad[i];
                v[i] = params.beta2 * v[i] + (1.0 - params.beta2) * grad[i] * grad[i];
                p[i] -= params.learning_rate * correction * m[i] / (std::sqrt(v[i]) + params.epsilon);
            }
        }
        epoch_loss /= static_cast<double>(n);

        const double monitored = use_validation ? network.loss(val_x, val_y, 0.0, nullptr) : epoch_loss;
        if (monitored < best_loss - params.tolerance) {
            stale = 0;
        } else {
            ++stale;
        }
        if (monitored < best_loss) {
            best_loss = monitored;
            if (use_validation) best_params.assign(network.parameters().begin(), network.parameters().end());
        }
        if (stale >= params.patience) {
            ++epoch;
            break;
        }
    }
    if (use_validation && !best_params.empty()) std::ranges::copy(best_params, network.parameters().begin());
    return std::make_unique<MlpModel>(std::move(labels.classes), std::move(network), epoch);
}

}  // namespace detail

}  // namespace attackmap::learn

#include <json.hpp>

#include <cmath>
#include <numbers>

#include "models.hpp"

namespace attackmap::learn::detail {

namespace {

class GaussianNbModel final : public ClassifierModel {
public:
    GaussianNbModel(std::vector<int> classes, std::size_t n_features, DenseMatrix means, DenseMatrix variances,
                    std::vector<double> log_priors)
        : ClassifierModel(std::move(classes), n_features),
          means_(std::move(means)),
          variances_(std::move(variances)),
          log_priors_(std::move(log_priors)) {
        log_norm_.resize(log_priors_.size());
        for (std::size_t c = 0; c < log_priors_.size(); ++c) {
            double sum = 0.0;
            for (const double v : variances_.row(c)) sum += std::log(2.0 * std::numbers::pi * v);
            log_norm_[c] = -0.5 * sum;
        }
    }

    Algorithm algorithm() const override { return Algorithm::gaussian_nb; }

    std::string dump_json() const override {
        nlohmann::json j;
        j["algorithm"] = "gaussian_nb";
        j["classes"] = class_labels();
        j["log_priors"] = log_priors_;
        return j.dump();
    }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override {
        const std::size_t n_classes = log_priors_.size();
        DenseMatrix out(x.rows(), n_classes);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto row = dense_row(x, r);
            double max_joint = -INFINITY;
            for (std::size_t c = 0; c < n_classes; ++c) {
                const auto mu = means_.row(c);
                const auto var = variances_.row(c);
                double quad = 0.0;
                for (std::size_t f = 0; f < row.size(); ++f) {
                    const double d = row[f] - mu[f];
                    quad += d * d / var[f];
                }
                out(r, c) = log_priors_[c] + log_norm_[c] - 0.5 * quad;
                max_joint = std::max(max_joint, out(r, c));
            }
            double total = 0.0;
            for (auto& v : out.row(r)) {
                v = std::exp(v - max_joint);
                total += v;
            }
            for (auto& v : out.row(r)) v /= total;
        }
        return out;
    }

private:
    DenseMatrix means_;
    DenseMatrix variances_;
    std::vector<double> log_priors_;
    std::vector<double> log_norm_;
};

}  // namespace

std::unique_ptr<ClassifierModel> fit_gaussian_nb(const FeatureMatrix& x, EncodedLabels labels,
                                                 const GaussianNbParams& params) {
    const DenseMatrix data = x.to_dense();
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const std::size_t n_classes = labels.classes.size();

    // Smoothing scales with the largest per-feature variance over all rows.
    double max_variance = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += data(r, f);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (data(r, f) - mean) * (data(r, f) - mean);
        max_variance = std::max(max_variance, var / static_cast<double>(n));
    }
    const double epsilon = params.var_smoothing * max_variance;

    DenseMatrix means(n_classes, d);
    DenseMatrix variances(n_classes, d);
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = static_cast<std::size_t>(labels.index[r]);
        counts[c] += 1.0;
        for (std::size_t f = 0; f < d; ++f) means(c, f) += data(r, f);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (auto& v : means.row(c)) v /= counts[c];
    }
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = static_cast<std::size_t>(labels.index[r]);
        for (std::size_t f = 0; f < d; ++f) {
            const double diff = data(r, f) - means(c, f);
            variances(c, f) += diff * diff;
        }
    }
    std::vector<double> log_priors(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (auto& v : variances.row(c)) {
            v = v / counts[c] + epsilon;
            // All-constant input leaves epsilon at zero; keep the density finite.
            if (v <= 0.0) v = 1e-300;
        }
        log_priors[c] = std::log(counts[c] / static_cast<double>(n));
    }
    return std::make_unique<GaussianNbModel>(std::move(labels.classes), d, std::move(means), std::move(variances),
                                             std::move(log_priors));
}

}  // namespace attackmap::learn::detail

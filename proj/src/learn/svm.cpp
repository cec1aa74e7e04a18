#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "attackmap/kernels.hpp"
#include "models.hpp"

namespace attackmap::learn {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * kernels::squared_distance(a, b));
}

// Dual SMO with second-order working-set selection (Fan, Chen & Lin 2005),
// as in LIBSVM's C-SVC solver without shrinking.
BinarySvm solve_smo(const DenseMatrix& kernel, std::span<const int> signs, double c, double tolerance,
                    std::size_t max_iterations) {
    constexpr double kTau = 1e-12;
    const std::size_t n = signs.size();
    if (kernel.rows() != n || kernel.cols() != n) throw InvalidArgument("solve_smo: kernel must be n x n");

    BinarySvm out;
    out.alpha.assign(n, 0.0);
    std::vector<double> gradient(n, -1.0);
    auto& alpha = out.alpha;
    const auto y = [&](std::size_t i) { return static_cast<double>(signs[i]); };
    const auto q = [&](std::size_t i, std::size_t j) { return y(i) * y(j) * kernel(i, j); };
    const auto at_upper = [&](std::size_t i) { return alpha[i] >= c; };
    const auto at_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

    for (; out.iterations < max_iterations; ++out.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (signs[t] == 1) {
                if (!at_upper(t) && -gradient[t] >= gmax) {
                    gmax = -gradient[t];
                    i = t;
                }
            } else if (!at_lower(t) && gradient[t] >= gmax) {
                gmax = gradient[t];
                i = t;
            }
        }

        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_objective = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n && i < n; ++t) {
            double grad_diff = 0.0;
            double quad = 0.0;
            if (signs[t] == 1) {
                if (at_lower(t)) continue;
                grad_diff = gmax + gradient[t];
                gmax2 = std::max(gmax2, gradient[t]);
                quad = kernel(i, i) + kernel(t, t) - 2.0 * y(i) * q(i, t);
            } else {
                if (at_upper(t)) continue;
                grad_diff = gmax - gradient[t];
                gmax2 = std::max(gmax2, -gradient[t]);
                quad = kernel(i, i) + kernel(t, t) + 2.0 * y(i) * q(i, t);
            }
            if (grad_diff > 0.0) {
                const double objective = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                if (objective <= best_objective) {
                    best_objective = objective;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax + gmax2 < tolerance) break;

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double qij = q(i, j);
        if (signs[i] != signs[j]) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-gradient[i] - gradient[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (gradient[i] - gradient[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double delta_i = alpha[i] - old_i;
        const double delta_j = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) gradient[t] += q(i, t) * delta_i + q(j, t) * delta_j;
    }

    // rho: mean of y*G over free vectors, else the midpoint of the feasible interval.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y(t) * gradient[t];
        if (at_upper(t)) {
            if (signs[t] == -1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (at_lower(t)) {
            if (signs[t] == 1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    out.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
    return out;
}

namespace detail {

namespace {

struct OvrMachine {
    std::vector<std::size_t> support;  // training rows with alpha > 0
    std::vector<double> coefficient;   // alpha_i * y_i
    double rho = 0.0;
};

class SvmModel final : public ClassifierModel {
public:
    SvmModel(std::vector<int> classes, FeatureMatrix train, double gamma, std::vector<OvrMachine> machines)
        : ClassifierModel(std::move(classes), train.cols()),
          train_(std::move(train)),
          gamma_(gamma),
          machines_(std::move(machines)) {}

    Algorithm algorithm() const override { return Algorithm::svm_rbf; }

    std::string dump_json() const override {
        nlohmann::json j;
        j["algorithm"] = "svm_rbf";
        j["gamma"] = gamma_;
        j["classes"] = class_labels();
        for (const auto& m : machines_) j["machines"].push_back({{"rho", m.rho}, {"support", m.support}, {"coef", m.coefficient}});
        return j.dump();
    }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override {
        DenseMatrix out(x.rows(), machines_.size());
        std::vector<double> k(train_.rows());
        std::vector<char> needed(train_.rows(), 0);
        for (const auto& m : machines_) {
            for (const auto s : m.support) needed[s] = 1;
        }
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t t = 0; t < train_.rows(); ++t) {
                k[t] = needed[t] ? std::exp(-gamma_ * row_squared_distance(x, r, train_, t)) : 0.0;
            }
            for (std::size_t c = 0; c < machines_.size(); ++c) {
                const auto& m = machines_[c];
                double value = -m.rho;
                for (std::size_t s = 0; s < m.support.size(); ++s) value += m.coefficient[s] * k[m.support[s]];
                out(r, c) = value;
            }
        }
        return out;
    }

private:
    FeatureMatrix train_;
    double gamma_;
    std::vector<OvrMachine> machines_;
};

double auto_gamma(const FeatureMatrix& x) {
    // 1 / (n_features * mean per-feature variance), zeros included.
    const std::size_t d = x.cols();
    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (x.is_sparse()) {
            const auto& row = x.sparse().row(r);
            for (std::size_t i = 0; i < row.nnz(); ++i) {
                sum[row.indices[i]] += row.values[i];
                sum_sq[row.indices[i]] += row.values[i] * row.values[i];
            }
        } else {
            const auto row = x.dense().row(r);
            for (std::size_t j = 0; j < d; ++j) {
                sum[j] += row[j];
                sum_sq[j] += row[j] * row[j];
            }
        }
    }
    const double n = static_cast<double>(x.rows());
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double mean = sum[j] / n;
        total += std::max(0.0, sum_sq[j] / n - mean * mean);
    }
    // d * (total / d)
    return total > 0.0 ? 1.0 / total : 1.0;
}

}  // namespace

std::unique_ptr<ClassifierModel> fit_svm(const FeatureMatrix& x, EncodedLabels labels, const SvmParams& params) {
    const std::size_t n = x.rows();
    const double gamma = params.gamma > 0.0 ? params.gamma : auto_gamma(x);

    DenseMatrix kernel(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        kernel(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double value = std::exp(-gamma * row_squared_distance(x, i, x, j));
            kernel(i, j) = value;
            kernel(j, i) = value;
        }
    }

    std::vector<OvrMachine> machines;
    std::vector<int> signs(n);
    for (std::size_t c = 0; c < labels.classes.size(); ++c) {
        for (std::size_t i = 0; i < n; ++i) signs[i] = labels.index[i] == static_cast<int>(c) ? 1 : -1;
        const BinarySvm solved = solve_smo(kernel, signs, params.c, params.tolerance, params.max_iterations);
        OvrMachine machine;
        machine.rho = solved.rho;
        for (std::size_t i = 0; i < n; ++i) {
            if (solved.alpha[i] > 0.0) {
                machine.support.push_back(i);
                machine.coefficient.push_back(solved.alpha[i] * signs[i]);
            }
        }
        machines.push_back(std::move(machine));
    }
    return std::make_unique<SvmModel>(std::move(labels.classes), x, gamma, std::move(machines));
}

}  // namespace detail

}  // namespace attackmap::learn

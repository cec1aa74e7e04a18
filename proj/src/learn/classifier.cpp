#include <array>
#include <utility>

#include "attackmap/learn.hpp"
#include "models.hpp"

namespace attackmap::learn {

namespace {

struct AlgorithmNames {
    Algorithm algorithm;
    std::string_view short_name;
    std::string_view long_name;
    std::string_view display;
};

constexpr std::array<AlgorithmNames, 6> kNames{{
    {Algorithm::knn, "knn", "knn", "KNN"},
    {Algorithm::gaussian_nb, "nb", "gaussian_nb", "NB"},
    {Algorithm::svm_rbf, "svm", "svm_rbf", "SVM"},
    {Algorithm::random_forest, "rf", "random_forest", "RF"},
    {Algorithm::decision_tree, "dt", "decision_tree", "DT"},
    {Algorithm::mlp, "nn", "mlp", "NN"},
}};

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) {
    for (const auto& n : kNames) {
        if (n.algorithm == algorithm) return n.short_name;
    }
    return "?";
}

std::string_view algorithm_display_name(Algorithm algorithm) {
    for (const auto& n : kNames) {
        if (n.algorithm == algorithm) return n.display;
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (const auto& n : kNames) {
        if (name == n.short_name || name == n.long_name) return n.algorithm;
    }
    return std::nullopt;
}

DenseMatrix ClassifierModel::predict_scores(const FeatureMatrix& x) const {
    if (x.cols() != n_features_) {
        throw InvalidArgument("predict: input has " + std::to_string(x.cols()) + " features, model was trained on " +
                              std::to_string(n_features_));
    }
    return scores_impl(x);
}

Labels ClassifierModel::predict(const FeatureMatrix& x) const {
    const DenseMatrix scores = predict_scores(x);
    Labels out(scores.rows());
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        const auto row = scores.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[r] = class_labels_[best];
    }
    return out;
}

std::unique_ptr<ClassifierModel> fit(const FeatureMatrix& x, std::span<const int> y, const TrainConfig& config,
                                     const ValidationSet& validation) {
    if (x.rows() != y.size()) {
        throw InvalidArgument("fit: " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " labels");
    }
    auto labels = detail::encode_labels(y);
    if (labels.classes.size() < 2) throw InvalidArgument("fit: need at least 2 classes");

    switch (config.algorithm) {
        case Algorithm::knn:
            return detail::fit_knn(x, std::move(labels), config.knn);
        case Algorithm::gaussian_nb:
            return detail::fit_gaussian_nb(x, std::move(labels), config.nb);
        case Algorithm::svm_rbf:
            return detail::fit_svm(x, std::move(labels), config.svm);
        case Algorithm::random_forest:
            return detail::fit_random_forest(x, std::move(labels), config.forest, config.seed);
        case Algorithm::decision_tree:
            return detail::fit_decision_tree(x, std::move(labels), config.tree, config.seed);
        case Algorithm::mlp:
            return detail::fit_mlp(x, std::move(labels), config.mlp, config.seed, validation);
    }
    throw InvalidArgument("fit: unknown algorithm");
}

double training_accuracy(const ClassifierModel& model, const FeatureMatrix& x, std::span<const int> y) {
    const auto predicted = model.predict(x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += predicted[i] == y[i] ? 1 : 0;
    return y.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(y.size());
}

namespace detail {

std::vector<double> dense_row(const FeatureMatrix& x, std::size_t r) {
    if (x.is_sparse()) return densify(x.sparse().row(r), x.cols());
    const auto row = x.dense().row(r);
    return {row.begin(), row.end()};
}

}  // namespace detail

}  // namespace attackmap::learn

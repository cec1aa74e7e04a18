#pragma once

// Internal constructors for the concrete classifiers.

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "attackmap/error.hpp"
#include "attackmap/learn.hpp"

namespace attackmap::learn::detail {

/// Distinct labels (ascending) and each row's index into them.
struct EncodedLabels {
    std::vector<int> classes;
    std::vector<int> index;
};

inline EncodedLabels encode_labels(std::span<const int> y) {
    EncodedLabels out;
    out.classes.assign(y.begin(), y.end());
    std::sort(out.classes.begin(), out.classes.end());
    out.classes.erase(std::unique(out.classes.begin(), out.classes.end()), out.classes.end());
    out.index.reserve(y.size());
    for (const int label : y) {
        out.index.push_back(static_cast<int>(std::lower_bound(out.classes.begin(), out.classes.end(), label) -
                                             out.classes.begin()));
    }
    return out;
}

std::unique_ptr<ClassifierModel> fit_knn(const FeatureMatrix& x, EncodedLabels labels, const KnnParams& params);
std::unique_ptr<ClassifierModel> fit_gaussian_nb(const FeatureMatrix& x, EncodedLabels labels,
                                                 const GaussianNbParams& params);
std::unique_ptr<ClassifierModel> fit_svm(const FeatureMatrix& x, EncodedLabels labels, const SvmParams& params);
std::unique_ptr<ClassifierModel> fit_decision_tree(const FeatureMatrix& x, EncodedLabels labels,
                                                   const TreeParams& params, std::uint64_t seed);
std::unique_ptr<ClassifierModel> fit_random_forest(const FeatureMatrix& x, EncodedLabels labels,
                                                   const ForestParams& params, std::uint64_t seed);
std::unique_ptr<ClassifierModel> fit_mlp(const FeatureMatrix& x, EncodedLabels labels, const MlpParams& params,
                                         std::uint64_t seed, const ValidationSet& validation);

/// Row r of x as a dense vector (copies for sparse storage).
std::vector<double> dense_row(const FeatureMatrix& x, std::size_t r);

}  // namespace attackmap::learn::detail

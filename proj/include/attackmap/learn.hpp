#pragma once

// SMOTE oversampling and the six benchmark classifiers.
//
// Labels are integers. A trained model reports its distinct training labels
// in ascending order (`class_labels`); score columns follow that order and
// `predict` returns values from it.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attackmap/matrix.hpp"

namespace attackmap::learn {

using Labels = std::vector<int>;

enum class Algorithm { knn, gaussian_nb, svm_rbf, random_forest, decision_tree, mlp };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::knn,           Algorithm::gaussian_nb,
                                               Algorithm::svm_rbf,       Algorithm::random_forest,
                                               Algorithm::decision_tree, Algorithm::mlp};

/// Canonical short name: knn, nb, svm, rf, dt, nn.
std::string_view algorithm_name(Algorithm algorithm);
/// Table label: KNN, NB, SVM, RF, DT, NN.
std::string_view algorithm_display_name(Algorithm algorithm);
/// Accepts short names and the long forms (gaussian_nb, svm_rbf, random_forest, decision_tree, mlp).
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct KnnParams {
    std::size_t k = 5;
};

struct GaussianNbParams {
    double var_smoothing = 1e-9;  // times the largest feature variance
};

struct SvmParams {
    double c = 1.0;
    double gamma = 0.0;  // <= 0 selects 1 / (n_features * variance of X)
    double tolerance = 1e-3;
    std::size_t max_iterations = 10'000'000;
};

struct TreeParams {
    std::size_t max_features = 0;    // candidate features per split; 0 = all
    std::size_t max_depth = 0;       // 0 = unlimited
    std::size_t max_leaf_nodes = 0;  // 0 = unlimited
    std::size_t min_samples_split = 2;
};

struct ForestParams {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    std::size_t max_features = 0;  // 0 = floor(sqrt(n_features))
    TreeParams tree;               // tree.max_features is ignored
};

struct MlpParams {
    std::size_t hidden_units = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double alpha = 1e-4;  // L2 penalty
    std::size_t batch_size = 200;
    std::size_t max_epochs = 200;
    double tolerance = 1e-4;
    std::size_t patience = 10;
};

struct TrainConfig {
    Algorithm algorithm = Algorithm::knn;
    std::uint64_t seed = 42;
    KnnParams knn;
    GaussianNbParams nb;
    SvmParams svm;
    TreeParams tree;
    ForestParams forest;
    MlpParams mlp;
};

/// Held-out rows some learners may use (the MLP stops early on them).
struct ValidationSet {
    const FeatureMatrix* x = nullptr;
    std::span<const int> y;
};

class ClassifierModel {
public:
    virtual ~ClassifierModel() = default;

    virtual Algorithm algorithm() const = 0;
    const std::vector<int>& class_labels() const { return class_labels_; }
    std::size_t n_features() const { return n_features_; }

    /// One row per input row, one column per class label. Probabilistic
    /// models return rows summing to 1; svm_rbf returns one-vs-rest decision values.
    DenseMatrix predict_scores(const FeatureMatrix& x) const;

    /// argmax of predict_scores, ties to the lowest class index.
    Labels predict(const FeatureMatrix& x) const;

    /// Debug dump of the trained parameters (unstable format).
    virtual std::string dump_json() const = 0;

protected:
    ClassifierModel(std::vector<int> class_labels, std::size_t n_features)
        : class_labels_(std::move(class_labels)), n_features_(n_features) {}

    virtual DenseMatrix scores_impl(const FeatureMatrix& x) const = 0;

private:
    std::vector<int> class_labels_;
    std::size_t n_features_;
};

std::unique_ptr<ClassifierModel> fit(const FeatureMatrix& x, std::span<const int> y, const TrainConfig& config,
                                     const ValidationSet& validation = {});

double training_accuracy(const ClassifierModel& model, const FeatureMatrix& x, std::span<const int> y);

// ---------------------------------------------------------------- SMOTE

struct SmoteResult {
    FeatureMatrix x;
    Labels y;
    std::vector<int> clamped_classes;  // classes whose k was reduced to class_size - 1
};

/// Oversamples every class up to the majority count. Original rows come
/// first, unchanged; synthetic rows follow grouped by ascending label.
SmoteResult smote(const FeatureMatrix& x, std::span<const int> y, std::size_t k_neighbors, std::uint64_t seed);

// ---------------------------------------------------------------- building blocks exposed for tests

/// Gini impurity of a class-count histogram.
double gini(std::span<const double> class_counts);

/// Dense one-vs-one RBF kernel value exp(-gamma * ||a - b||^2).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Binary soft-margin SVM solved by SMO. Labels are +1/-1.
struct BinarySvm {
    std::vector<double> alpha;  // dual coefficients, 0 <= alpha <= C
    double rho = 0.0;           // decision(x) = sum alpha_i y_i K(x_i, x) - rho
    std::size_t iterations = 0;
};
BinarySvm solve_smo(const DenseMatrix& kernel, std::span<const int> signs, double c, double tolerance,
                    std::size_t max_iterations);

/// Fully connected ReLU network with a softmax output layer. Parameters live
/// in one flat vector: W1 (hidden x inputs), b1, W2 (classes x hidden), b2.
class MlpNetwork {
public:
    MlpNetwork(std::size_t inputs, std::size_t hidden, std::size_t classes);

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t classes() const { return classes_; }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    /// Glorot-uniform initialization.
    void initialize(std::uint64_t seed);

    /// Mean cross-entropy over the rows plus alpha/(2n) * ||W||^2. When
    /// `gradient` is non-null it receives d loss / d parameters. `y` holds
    /// class indices in [0, classes).
    double loss(const DenseMatrix& x, std::span<const int> y, double alpha, std::vector<double>* gradient) const;

    /// Softmax probabilities, one row per input row.
    DenseMatrix forward(const DenseMatrix& x) const;

private:
    std::size_t inputs_;
    std::size_t hidden_;
    std::size_t classes_;
    std::vector<double> params_;
};

}  // namespace attackmap::learn

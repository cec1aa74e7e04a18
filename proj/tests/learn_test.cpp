#include <doctest.h>

#include <algorithm>
#include <Eigen/Dense>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "attackmap/error.hpp"
#include "attackmap/learn.hpp"
#include "attackmap/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace attackmap;
using namespace attackmap::learn;

namespace {

TrainConfig config_for(Algorithm a, std::uint64_t seed = 7) {
    TrainConfig c;
    c.algorithm = a;
    c.seed = seed;
    return c;
}

std::map<int, std::size_t> counts(std::span<const int> y) {
    std::map<int, std::size_t> out;
    for (const int v : y) ++out[v];
    return out;
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("algorithm names") {
    for (const Algorithm a : kAllAlgorithms) CHECK(parse_algorithm(algorithm_name(a)) == a);
    CHECK(parse_algorithm("gaussian_nb") == Algorithm::gaussian_nb);
    CHECK(parse_algorithm("mlp") == Algorithm::mlp);
    CHECK(parse_algorithm("random_forest") == Algorithm::random_forest);
    CHECK_FALSE(parse_algorithm("xgboost"));
    CHECK(algorithm_display_name(Algorithm::mlp) == "NN");
}

TEST_CASE("gini impurity") {
    const std::vector<double> pure{5, 0}, half{3, 3}, third{1, 1, 1};
    CHECK(gini(pure) == 0.0);
    CHECK(gini(half) == 0.5);
    CHECK(gini(third) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("SMOTE balances classes and keeps originals") {
    Rng rng(3);
    DenseMatrix x(0, 3);
    std::vector<int> y;
    for (int i = 0; i < 14; ++i) {
        x.append_row(std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
        y.push_back(i < 10 ? 0 : 1);
    }
    const FeatureMatrix fx{x, {}};
    const auto out = smote(fx, y, 5, 99);
    CHECK(counts(out.y) == std::map<int, std::size_t>{{0, 10}, {1, 10}});
    CHECK(out.clamped_classes == std::vector<int>{1});  // 4 samples -> k = 3
    const auto& d = out.x.dense();
    for (std::size_t r = 0; r < 14; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(d(r, c) == x(r, c));
    CHECK(std::vector<int>(out.y.begin(), out.y.begin() + 14) == y);

    const auto again = smote(fx, y, 5, 99);
    CHECK(again.x.dense() == d);

    const auto balanced = smote(FeatureMatrix{DenseMatrix(d), {}}, out.y, 5, 1);
    CHECK(balanced.x.dense() == d);
    CHECK(balanced.y == out.y);

    const std::vector<int> lonely{0, 0, 0, 1};
    CHECK_THROWS_WITH(smote(testing::dense({{0}, {1}, {2}, {3}}), lonely, 5, 1), doctest::Contains("class 1"));
}

TEST_CASE("SMOTE synthetic points lie on source-neighbor segments") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const std::size_t classes = 2 + rng.below(3), dims = 1 + rng.below(5);
        DenseMatrix x(0, dims);
        std::vector<int> y;
        for (std::size_t c = 0; c < classes; ++c) {
            const std::size_t n = 2 + rng.below(15);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> row(dims);
                for (double& v : row) v = rng.normal() + 3.0 * static_cast<double>(c);
                x.append_row(row);
                y.push_back(static_cast<int>(c));
            }
        }
        const std::size_t k = 1 + rng.below(6);
        const auto out = smote(FeatureMatrix{x, {}}, y, k, seed);
        const auto before = counts(y);
        std::size_t majority = 0;
        for (const auto& [c, n] : before) majority = std::max(majority, n);
        for (const auto& [c, n] : counts(out.y)) CHECK(n == majority);

        const auto& d = out.x.dense();
        CAPTURE(seed);
        CHECK(oracle::worst_smote_segment_distance(x, y, d, out.y, k) <= 1e-9);
    }
}

TEST_CASE("SMOTE keeps sparse input sparse") {
    SparseMatrix s(5);
    std::vector<int> y;
    for (std::uint32_t i = 0; i < 8; ++i) {
        s.append_row(SparseRow{{i % 5}, {1.0 + i}});
        y.push_back(i < 5 ? 0 : 1);
    }
    const auto out = smote(FeatureMatrix{s, {}}, y, 5, 4);
    CHECK(out.x.is_sparse());
    CHECK(out.x.rows() == 10);
    for (std::size_t r = 0; r < 8; ++r) CHECK(out.x.sparse().row(r) == s.row(r));
}

TEST_CASE("every classifier fits separable blobs") {
    const auto blobs = testing::make_blobs(21, 200, 3, 10);
    for (const Algorithm a : kAllAlgorithms) {
        CAPTURE(algorithm_name(a));
        const auto start = std::chrono::steady_clock::now();
        const auto model = fit(blobs.x, blobs.y, config_for(a));
        CHECK(training_accuracy(*model, blobs.x, blobs.y) >= 0.95);
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
        CHECK(model->class_labels() == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("predict is the argmax of the scores, and fitting is deterministic") {
    const auto blobs = testing::make_blobs(5, 90, 3, 4, 3.0, 2.0);  // overlapping classes
    for (const Algorithm a : kAllAlgorithms) {
        CAPTURE(algorithm_name(a));
        const auto model = fit(blobs.x, blobs.y, config_for(a));
        const auto scores = model->predict_scores(blobs.x);
        const auto predicted = model->predict(blobs.x);
        CHECK(scores.cols() == 3);
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < scores.cols(); ++c)
                if (scores(r, c) > scores(r, best)) best = c;
            CHECK(predicted[r] == model->class_labels()[best]);
        }
        CHECK(fit(blobs.x, blobs.y, config_for(a))->dump_json() == model->dump_json());
        CHECK_THROWS_AS(model->predict(testing::dense({{1.0, 2.0}})), InvalidArgument);
    }
}

TEST_CASE("labels need not be contiguous") {
    auto blobs = testing::make_blobs(8, 60, 2, 3);
    for (int& v : blobs.y) v = v == 0 ? 7 : 42;
    for (const Algorithm a : kAllAlgorithms) {
        const auto model = fit(blobs.x, blobs.y, config_for(a));
        CHECK(model->class_labels() == std::vector<int>{7, 42});
        for (const int p : model->predict(blobs.x)) CHECK((p == 7 || p == 42));
    }
}

TEST_CASE("degenerate training input") {
    const auto x = testing::dense({{0.0}, {1.0}, {2.0}});
    const std::vector<int> one_class{3, 3, 3};
    for (const Algorithm a : kAllAlgorithms) CHECK_THROWS_AS(fit(x, one_class, config_for(a)), InvalidArgument);
    const std::vector<int> short_labels{0, 1};
    CHECK_THROWS_AS(fit(x, short_labels, config_for(Algorithm::knn)), InvalidArgument);
}

TEST_CASE("knn votes") {
    const auto x = testing::dense({{1}, {-2}, {3}, {1.5}, {-2.5}, {100}, {101}});
    const std::vector<int> y{0, 0, 0, 1, 1, 1, 1};
    const auto model = fit(x, y, config_for(Algorithm::knn));
    const auto s = model->predict_scores(testing::dense({{0.0}}));
    CHECK(s(0, 0) == doctest::Approx(0.6));
    CHECK(s(0, 1) == doctest::Approx(0.4));

    TrainConfig one = config_for(Algorithm::knn);
    one.knn.k = 1;
    const auto nearest = fit(x, y, one);
    CHECK(nearest->predict(testing::dense({{1.5}})) == std::vector<int>{1});
    CHECK(nearest->predict(testing::dense({{-2.0}})) == std::vector<int>{0});
}

TEST_CASE("knn works on sparse rows") {
    SparseMatrix s(4);
    s.append_row({{0}, {1.0}});
    s.append_row({{0, 1}, {1.0, 0.1}});
    s.append_row({{3}, {1.0}});
    s.append_row({{2, 3}, {0.1, 1.0}});
    const std::vector<int> y{0, 0, 1, 1};
    TrainConfig c = config_for(Algorithm::knn);
    c.knn.k = 1;
    const auto model = fit(FeatureMatrix{s, {}}, y, c);
    CHECK(model->predict(testing::dense({{0.9, 0, 0, 0}, {0, 0, 0, 0.8}})) == std::vector<int>{0, 1});
}

TEST_CASE("gaussian naive Bayes matches the closed form") {
    const auto x = testing::dense({{0.0}, {2.0}, {1.0}, {5.0}, {6.0}});
    const std::vector<int> y{0, 0, 1, 1, 1};
    const auto model = fit(x, y, config_for(Algorithm::gaussian_nb));
    const double query = 1.5;

    const auto moments = [](std::vector<double> v) {
        double m = 0, s = 0;
        for (double a : v) m += a;
        m /= static_cast<double>(v.size());
        for (double a : v) s += (a - m) * (a - m);
        return std::pair{m, s / static_cast<double>(v.size())};
    };
    const auto [mean_all, var_all] = moments({0, 2, 1, 5, 6});
    (void)mean_all;
    const double eps = 1e-9 * var_all;
    const auto [m0, v0] = moments({0, 2});
    const auto [m1, v1] = moments({1, 5, 6});
    const auto density = [](double q, double m, double v) {
        return std::exp(-(q - m) * (q - m) / (2 * v)) / std::sqrt(2 * M_PI * v);
    };
    const double j0 = 0.4 * density(query, m0, v0 + eps);
    const double j1 = 0.6 * density(query, m1, v1 + eps);
    const auto s = model->predict_scores(testing::dense({{query}}));
    CHECK(std::abs(s(0, 0) - j0 / (j0 + j1)) < 1e-9);
    CHECK(std::abs(s(0, 1) - j1 / (j0 + j1)) < 1e-9);
}

TEST_CASE("gaussian naive Bayes falls back to the prior") {
    const auto x = testing::dense({{1}, {2}, {3}, {1}, {2}, {3}, {1}, {2}, {3}});
    const std::vector<int> y{0, 0, 0, 0, 0, 0, 1, 1, 1};
    const auto model = fit(x, y, config_for(Algorithm::gaussian_nb));
    CHECK(model->predict(testing::dense({{0.0}, {2.0}, {9.0}})) == std::vector<int>{0, 0, 0});
}

TEST_CASE("RBF kernel matrices are symmetric positive semidefinite") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng.below(20), d = 1 + rng.below(6);
        const auto pts = testing::random_matrix(rng, n, d);
        const double gamma = rng.uniform(0.01, 3.0);
        Eigen::MatrixXd k(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rbf_kernel(pts.row(i), pts.row(j), gamma);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
    }
}

TEST_CASE("SMO solution satisfies the KKT conditions") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto blobs = testing::make_blobs(seed, 60, 2, 3, 2.0, 1.5);
        const auto& x = blobs.x.dense();
        const std::size_t n = x.rows();
        DenseMatrix k(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) k(i, j) = rbf_kernel(x.row(i), x.row(j), 0.5);
        std::vector<int> signs(n);
        for (std::size_t i = 0; i < n; ++i) signs[i] = blobs.y[i] == 0 ? 1 : -1;
        const double c = 1.0, tol = 1e-3;
        const auto svm = solve_smo(k, signs, c, tol, 1'000'000);
        double balance = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CAPTURE(i);
            CHECK(svm.alpha[i] >= 0.0);
            CHECK(svm.alpha[i] <= c);
            balance += svm.alpha[i] * signs[i];
            double f = -svm.rho;
            for (std::size_t j = 0; j < n; ++j) f += svm.alpha[j] * signs[j] * k(i, j);
            const double margin = signs[i] * f;
            if (svm.alpha[i] <= 0.0) CHECK(margin >= 1.0 - tol);
            else if (svm.alpha[i] >= c) CHECK(margin <= 1.0 + tol);
            else CHECK(std::abs(margin - 1.0) <= tol);
        }
        CHECK(std::abs(balance) < 1e-9);
    }
}

TEST_CASE("svm separates XOR") {
    const auto x = testing::dense({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const std::vector<int> y{0, 0, 1, 1};
    const auto model = fit(x, y, config_for(Algorithm::svm_rbf));
    CHECK(training_accuracy(*model, x, y) == 1.0);
}

TEST_CASE("decision tree on a single clean split") {
    const auto x = testing::dense({{0.0, 5.0}, {1.0, 3.0}, {2.0, 4.0}, {10.0, 3.5}, {11.0, 5.0}, {12.0, 4.5}});
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const auto model = fit(x, y, config_for(Algorithm::decision_tree));
    const auto dump = nlohmann::json::parse(model->dump_json());
    const auto& nodes = dump.at("nodes");
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].at("feature") == 0);
    CHECK(nodes[0].at("threshold").get<double>() == 6.0);
    for (int leaf : {nodes[0].at("left").get<int>(), nodes[0].at("right").get<int>()}) {
        CHECK(nodes[leaf].at("feature") == -1);
        const auto dist = nodes[leaf].at("distribution").get<std::vector<double>>();
        CHECK(gini(dist) == 0.0);
    }
}

TEST_CASE("a one-tree forest without bootstrap is a decision tree") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto blobs = testing::make_blobs(seed, 120, 3, 5, 2.5, 2.0);
        TrainConfig rf = config_for(Algorithm::random_forest, seed);
        rf.forest.n_trees = 1;
        rf.forest.bootstrap = false;
        rf.forest.max_features = 5;
        const auto forest = fit(blobs.x, blobs.y, rf);
        const auto tree = fit(blobs.x, blobs.y, config_for(Algorithm::decision_tree, seed));
        const auto probe = testing::make_blobs(seed + 100, 200, 3, 5, 4.0, 2.0);
        CHECK(forest->predict(probe.x) == tree->predict(probe.x));
        CHECK(forest->predict_scores(probe.x) == tree->predict_scores(probe.x));
    }
}

TEST_CASE("random forest seeds matter, fits repeat") {
    const auto blobs = testing::make_blobs(2, 100, 2, 6, 3.0, 1.0);
    const auto a = fit(blobs.x, blobs.y, config_for(Algorithm::random_forest, 1));
    const auto b = fit(blobs.x, blobs.y, config_for(Algorithm::random_forest, 1));
    const auto c = fit(blobs.x, blobs.y, config_for(Algorithm::random_forest, 2));
    CHECK(a->dump_json() == b->dump_json());
    CHECK(a->dump_json() != c->dump_json());
}

TEST_CASE("mlp gradient matches central differences") {
    Rng rng(31);
    for (int trial = 0; trial < 3; ++trial) {
        MlpNetwork net(6, 8, 4);
        net.initialize(100 + static_cast<std::uint64_t>(trial));
        const auto x = testing::random_matrix(rng, 12, 6);
        std::vector<int> y(12);
        for (int& v : y) v = static_cast<int>(rng.below(4));
        const double alpha = 1e-2;
        std::vector<double> grad;
        net.loss(x, y, alpha, &grad);
        REQUIRE(grad.size() == net.parameters().size());
        double worst = 0;
        for (int probe = 0; probe < 10; ++probe) {
            const std::size_t i = rng.below(grad.size());
            const double saved = net.parameters()[i], h = 1e-5;
            net.parameters()[i] = saved + h;
            const double up = net.loss(x, y, alpha, nullptr);
            net.parameters()[i] = saved - h;
            const double down = net.loss(x, y, alpha, nullptr);
            net.parameters()[i] = saved;
            const double numeric = (up - down) / (2 * h);
            const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
            worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("mlp outputs are distributions and validation data is accepted") {
    const auto all = testing::make_blobs(4, 180, 3, 5);
    std::vector<std::size_t> train_rows(150), val_rows(30);
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::iota(val_rows.begin(), val_rows.end(), std::size_t{150});
    const testing::Blobs blobs{all.x.select(train_rows), {all.y.begin(), all.y.begin() + 150}};
    const testing::Blobs val{all.x.select(val_rows), {all.y.begin() + 150, all.y.end()}};
    const auto model = fit(blobs.x, blobs.y, config_for(Algorithm::mlp), {&val.x, val.y});
    const auto s = model->predict_scores(val.x);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double sum = 0;
        for (const double v : s.row(r)) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    CHECK(training_accuracy(*model, blobs.x, blobs.y) >= 0.95);
}

}

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "attackmap/rng.hpp"
#include "models.hpp"

namespace attackmap::learn {

double gini(std::span<const double> class_counts) {
    double total = 0.0;
    for (const double c : class_counts) total += c;
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (const double c : class_counts) sum_sq += (c / total) * (c / total);
    return 1.0 - sum_sq;
}

namespace detail {

namespace {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // normalized weighted class frequencies
};

struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = -INFINITY;
};

class Tree {
public:
    const std::vector<double>& leaf_distribution(std::span<const double> row) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& n = nodes_[static_cast<std::size_t>(node)];
            node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].distribution;
    }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t depth() const { return depth_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    friend class TreeBuilder;

private:
    std::vector<TreeNode> nodes_;
    std::size_t depth_ = 0;
};

// Grows one CART tree best-first: the pending node with the largest weighted
// impurity decrease is split next (ties to the earliest-created node).
class TreeBuilder {
public:
    TreeBuilder(const DenseMatrix& x, std::span<const int> y, std::size_t n_classes, std::span<const double> weights,
                const TreeParams& params, Rng* rng)
        : x_(x), y_(y), n_classes_(n_classes), weights_(weights), params_(params), rng_(rng) {
        for (std::size_t i = 0; i < weights.size(); ++i) total_weight_ += weights[i];
    }

    Tree build() {
        Tree tree;
        std::vector<std::size_t> root;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (weights_[i] > 0.0) root.push_back(i);
        }
        struct Pending {
            double decrease;
            std::size_t order;
            int node;
            std::size_t depth;
            std::vector<std::size_t> samples;
            Split split;
        };
        auto cmp = [](const Pending& a, const Pending& b) {
            if (a.decrease != b.decrease) return a.decrease < b.decrease;
            return a.order > b.order;
        };
        std::priority_queue<Pending, std::vector<Pending>, decltype(cmp)> queue(cmp);
        std::size_t created = 0;
        std::size_t leaves = 1;

        auto make_node = [&](std::vector<std::size_t> samples, std::size_t depth) {
            TreeNode node;
            node.distribution = counts(samples);
            const double impurity = gini(node.distribution);
            const double weight = std::accumulate(node.distribution.begin(), node.distribution.end(), 0.0);
            for (auto& v : node.distribution) v /= weight;
            tree.nodes_.push_back(std::move(node));
            tree.depth_ = std::max(tree.depth_, depth);
            const int id = static_cast<int>(tree.nodes_.size() - 1);

            const bool can_split = impurity > 0.0 && samples.size() >= params_.min_samples_split &&
                                   (params_.max_depth == 0 || depth < params_.max_depth);
            if (!can_split) return;
            Split split = best_split(samples, impurity, weight);
            if (!split.valid) return;
            queue.push(Pending{split.decrease, created++, id, depth, std::move(samples), split});
        };

        make_node(std::move(root), 0);
        while (!queue.empty()) {
            if (params_.max_leaf_nodes != 0 && leaves >= params_.max_leaf_nodes) break;
            Pending p = queue.top();
            queue.pop();
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (const auto s : p.samples) {
                (x_(s, p.split.feature) <= p.split.threshold ? left : right).push_back(s);
            }
            auto& node = tree.nodes_[static_cast<std::size_t>(p.node)];
            node.feature = static_cast<int>(p.split.feature);
            node.threshold = p.split.threshold;
            node.left = static_cast<int>(tree.nodes_.size());
            make_node(std::move(left), p.depth + 1);
            tree.nodes_[static_cast<std::size_t>(p.node)].right = static_cast<int>(tree.nodes_.size());
            make_node(std::move(right), p.depth + 1);
            ++leaves;
        }
        return tree;
    }

private:
    std::vector<double> counts(const std::vector<std::size_t>& samples) const {
        std::vector<double> out(n_classes_, 0.0);
        for (const auto s : samples) out[static_cast<std::size_t>(y_[s])] += weights_[s];
        return out;
    }

    // Candidate features: all (ascending) or a random draw that continues past
    // constant features until max_features non-constant ones were examined.
    Split best_split(const std::vector<std::size_t>& samples, double parent_impurity, double node_weight) {
        const std::size_t d = x_.cols();
        const bool sample_features = params_.max_features != 0 && params_.max_features < d;
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        if (sample_features) rng_->shuffle(std::span<std::size_t>(order));

        Split best;
        std::size_t visited_informative = 0;
        std::vector<std::size_t> sorted(samples);
        std::vector<double> left_counts(n_classes_);
        const std::vector<double> parent_counts = counts(samples);
        for (const std::size_t f : order) {
            if (sample_features && visited_informative >= params_.max_features) break;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                const double va = x_(a, f);
                const double vb = x_(b, f);
                return va != vb ? va < vb : a < b;
            });
            if (x_(sorted.front(), f) == x_(sorted.back(), f)) continue;
            ++visited_informative;

            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            double left_weight = 0.0;
            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                const auto s = sorted[pos];
                left_counts[static_cast<std::size_t>(y_[s])] += weights_[s];
                left_weight += weights_[s];
                const double here = x_(s, f);
                const double next = x_(sorted[pos + 1], f);
                if (here == next) continue;
                std::vector<double> right_counts(parent_counts);
                for (std::size_t c = 0; c < n_classes_; ++c) right_counts[c] -= left_counts[c];
                const double right_weight = node_weight - left_weight;
                const double child = (left_weight * gini(left_counts) + right_weight * gini(right_counts)) / node_weight;
                const double decrease = node_weight / total_weight_ * (parent_impurity - child);
                const bool better = !best.valid || decrease > best.decrease + 1e-12 ||
                                    (std::abs(decrease - best.decrease) <= 1e-12 && f < best.feature);
                if (better) {
                    double threshold = here + (next - here) / 2.0;
                    if (threshold >= next) threshold = here;
                    best = Split{true, f, threshold, decrease};
                }
            }
        }
        return best;
    }

    const DenseMatrix& x_;
    std::span<const int> y_;
    std::size_t n_classes_;
    std::span<const double> weights_;
    const TreeParams& params_;
    Rng* rng_;
    double total_weight_ = 0.0;
};

nlohmann::json tree_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                         {"distribution", n.distribution}});
    }
    return nodes;
}

class DecisionTreeModel final : public ClassifierModel {
public:
    DecisionTreeModel(std::vector<int> classes, std::size_t n_features, Tree tree)
        : ClassifierModel(std::move(classes), n_features), tree_(std::move(tree)) {}

    Algorithm algorithm() const override { return Algorithm::decision_tree; }

    std::string dump_json() const override {
        return nlohmann::json{{"algorithm", "decision_tree"}, {"classes", class_labels()}, {"nodes", tree_json(tree_)}}.dump();
    }

    const Tree& tree() const { return tree_; }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override {
        DenseMatrix out(x.rows(), class_labels().size());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto row = dense_row(x, r);
            std::ranges::copy(tree_.leaf_distribution(row), out.row(r).begin());
        }
        return out;
    }

private:
    Tree tree_;
};

class RandomForestModel final : public ClassifierModel {
public:
    RandomForestModel(std::vector<int> classes, std::size_t n_features, std::vector<Tree> trees)
        : ClassifierModel(std::move(classes), n_features), trees_(std::move(trees)) {}

    Algorithm algorithm() const override { return Algorithm::random_forest; }

    std::string dump_json() const override {
        nlohmann::json j{{"algorithm", "random_forest"}, {"classes", class_labels()}};
        for (const auto& t : trees_) j["trees"].push_back(tree_json(t));
        return j.dump();
    }

protected:
    DenseMatrix scores_impl(const FeatureMatrix& x) const override {
        DenseMatrix out(x.rows(), class_labels().size());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto row = dense_row(x, r);
            auto scores = out.row(r);
            for (const auto& tree : trees_) {
                const auto& dist = tree.leaf_distribution(row);
                for (std::size_t c = 0; c < dist.size(); ++c) scores[c] += dist[c];
            }
            for (auto& v : scores) v /= static_cast<double>(trees_.size());
        }
        return out;
    }

private:
    std::vector<Tree> trees_;
};

}  // namespace

std::unique_ptr<ClassifierModel> fit_decision_tree(const FeatureMatrix& x, EncodedLabels labels,
                                                   const TreeParams& params, std::uint64_t seed) {
    const DenseMatrix data = x.to_dense();
    const std::vector<double> weights(data.rows(), 1.0);
    Rng rng(seed);
    Tree tree = TreeBuilder(data, labels.index, labels.classes.size(), weights, params, &rng).build();
    return std::make_unique<DecisionTreeModel>(std::move(labels.classes), data.cols(), std::move(tree));
}

std::unique_ptr<ClassifierModel> fit_random_forest(const FeatureMatrix& x, EncodedLabels labels,
                                                   const ForestParams& params, std::uint64_t seed) {
    if (params.n_trees == 0) throw InvalidArgument("random_forest: n_trees must be positive");
    const DenseMatrix data = x.to_dense();
    const std::size_t n = data.rows();
    TreeParams tree_params = params.tree;
    tree_params.max_features = params.max_features != 0
                                   ? params.max_features
                                   : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.cols()))));

    std::vector<Tree> trees;
    trees.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng(mix_seed(seed, t));
        std::vector<double> weights(n, params.bootstrap ? 0.0 : 1.0);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
        }
        trees.push_back(TreeBuilder(data, labels.index, labels.classes.size(), weights, tree_params, &rng).build());
    }
    return std::make_unique<RandomForestModel>(std::move(labels.classes), data.cols(), std::move(trees));
}

}  // namespace detail

}  // namespace attackmap::learn

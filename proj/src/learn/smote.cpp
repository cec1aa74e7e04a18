#include <algorithm>
#include <map>

#include "attackmap/kernels.hpp"
#include "attackmap/rng.hpp"
#include "models.hpp"

namespace attackmap::learn {

SmoteResult smote(const FeatureMatrix& x, std::span<const int> y, std::size_t k_neighbors, std::uint64_t seed) {
    if (x.rows() != y.size()) throw InvalidArgument("smote: row/label count mismatch");
    if (k_neighbors == 0) throw InvalidArgument("smote: k_neighbors must be positive");

    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
    std::size_t majority = 0;
    for (const auto& [label, rows] : members) {
        if (rows.size() < 2) throw InvalidArgument("smote: class " + std::to_string(label) + " has fewer than 2 samples");
        majority = std::max(majority, rows.size());
    }

    SmoteResult result;
    result.y.assign(y.begin(), y.end());
    const DenseMatrix dense = x.to_dense();
    DenseMatrix synthetic(0, x.cols());
    Rng rng(seed);

    for (const auto& [label, rows] : members) {
        const std::size_t deficit = majority - rows.size();
        if (deficit == 0) continue;
        std::size_t k = k_neighbors;
        if (k > rows.size() - 1) {
            k = rows.size() - 1;
            result.clamped_classes.push_back(label);
        }

        // k nearest same-class neighbours of every member, nearest first, ties by row.
        std::vector<std::vector<std::size_t>> neighbours(rows.size());
        std::vector<std::pair<double, std::size_t>> distances;
        for (std::size_t a = 0; a < rows.size(); ++a) {
            distances.clear();
            for (std::size_t b = 0; b < rows.size(); ++b) {
                if (a == b) continue;
                distances.emplace_back(kernels::squared_distance(dense.row(rows[a]), dense.row(rows[b])), rows[b]);
            }
            std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k), distances.end());
            for (std::size_t n = 0; n < k; ++n) neighbours[a].push_back(distances[n].second);
        }

        std::vector<double> point(x.cols());
        for (std::size_t s = 0; s < deficit; ++s) {
            const std::size_t a = rng.below(rows.size());
            const std::size_t nn = neighbours[a][rng.below(k)];
            const double u = rng.uniform();
            const auto base = dense.row(rows[a]);
            const auto other = dense.row(nn);
            for (std::size_t f = 0; f < point.size(); ++f) point[f] = base[f] + u * (other[f] - base[f]);
            synthetic.append_row(point);
            result.y.push_back(label);
        }
    }

    result.x.row_ids = x.row_ids;
    result.x.row_ids.resize(result.y.size());
    if (x.is_sparse()) {
        SparseMatrix out(x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) out.append_row(x.sparse().row(r));
        for (std::size_t r = 0; r < synthetic.rows(); ++r) out.append_row(sparsify(synthetic.row(r)));
        result.x.storage = std::move(out);
    } else {
        DenseMatrix out = x.dense();
        for (std::size_t r = 0; r < synthetic.rows(); ++r) out.append_row(synthetic.row(r));
        result.x.storage = std::move(out);
    }
    return result;
}

}  // namespace attackmap::learn

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attackmap/error.hpp"
#include "attackmap/features.hpp"
#include "attackmap/kernels.hpp"

namespace attackmap::features {

namespace {

constexpr double kOrthogonalityTol = 1e-15;
constexpr int kMaxSweeps = 100;

struct RowSvd {
    DenseMatrix left;   // r x r orthogonal accumulated rotations, stored transposed
    DenseMatrix right;  // r x len rows, mutually orthogonal after convergence
};

// Orthogonalizes the rows of `rows` in place with plane rotations.
DenseMatrix orthogonalize_rows(DenseMatrix& rows) {
    const std::size_t r = rows.rows();
    DenseMatrix rotations(r, r);
    for (std::size_t i = 0; i < r; ++i) rotations(i, i) = 1.0;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < r; ++p) {
            for (std::size_t q = p + 1; q < r; ++q) {
                const double alpha = kernels::dot(rows.row(p), rows.row(p));
                const double beta = kernels::dot(rows.row(q), rows.row(q));
                const double gamma = kernels::dot(rows.row(p), rows.row(q));
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= kOrthogonalityTol * std::sqrt(alpha * beta)) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                kernels::rotate(rows.row(p), rows.row(q), c, s);
                kernels::rotate(rotations.row(p), rotations.row(q), c, s);
                rotated = true;
            }
        }
        if (!rotated) break;
    }
    return rotations;
}

// Fills `columns[index]` (column of a len x r matrix) with a unit vector
// orthogonal to every column listed in `basis`.
void complete_column(DenseMatrix& m, std::size_t index, const std::vector<std::size_t>& basis) {
    const std::size_t len = m.rows();
    std::vector<double> candidate(len);
    for (std::size_t e = 0; e < len; ++e) {
        std::fill(candidate.begin(), candidate.end(), 0.0);
        candidate[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto b : basis) {
                double proj = 0.0;
                for (std::size_t i = 0; i < len; ++i) proj += candidate[i] * m(i, b);
                for (std::size_t i = 0; i < len; ++i) candidate[i] -= proj * m(i, b);
            }
        }
        double norm = 0.0;
        for (const double v : candidate) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.5) {
            for (std::size_t i = 0; i < len; ++i) m(i, index) = candidate[i] / norm;
            return;
        }
    }
}

}  // namespace

ThinSvd jacobi_svd(const DenseMatrix& a) {
    const bool transpose = a.rows() > a.cols();
    const std::size_t r = std::min(a.rows(), a.cols());
    const std::size_t len = std::max(a.rows(), a.cols());

    // Work on the shorter side: rows of A (or of A^T) are the vectors rotated.
    DenseMatrix work(r, len);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < len; ++j) work(i, j) = transpose ? a(j, i) : a(i, j);
    }
    const DenseMatrix rotations = orthogonalize_rows(work);

    std::vector<double> norms(r);
    for (std::size_t i = 0; i < r; ++i) norms[i] = std::sqrt(kernels::dot(work.row(i), work.row(i)));
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    // work = J^T-rotated rows: A' = J diag(s) N^T where N holds the normalized rows.
    DenseMatrix short_side(r, r);  // columns are singular vectors on the short side
    DenseMatrix long_side(len, r);
    std::vector<double> s(r);
    const double smax = r == 0 ? 0.0 : norms[order[0]];
    std::vector<std::size_t> good;
    std::vector<std::size_t> deficient;
    for (std::size_t c = 0; c < r; ++c) {
        const std::size_t src = order[c];
        s[c] = norms[src];
        for (std::size_t i = 0; i < r; ++i) short_side(i, c) = rotations(src, i);
        if (s[c] > 0.0 && s[c] > smax * 1e-13) {
            for (std::size_t i = 0; i < len; ++i) long_side(i, c) = work(src, i) / s[c];
            good.push_back(c);
        } else {
            deficient.push_back(c);
        }
    }
    for (const auto c : deficient) {
        complete_column(long_side, c, good);
        good.push_back(c);
    }

    ThinSvd out;
    out.s = std::move(s);
    if (transpose) {
        out.u = std::move(long_side);
        out.v = std::move(short_side);
    } else {
        out.u = std::move(short_side);
        out.v = std::move(long_side);
    }
    return out;
}

std::size_t default_lsi_rank(std::size_t rows, std::size_t cols, std::size_t requested) {
    const std::size_t cap = std::min(rows, cols);
    const std::size_t k = std::min(requested, cap > 1 ? cap - 1 : 1);
    return std::max<std::size_t>(k, 1);
}

LsiModel fit_lsi(const FeatureMatrix& tfidf, std::size_t k) {
    const std::size_t limit = std::min(tfidf.rows(), tfidf.cols());
    if (k == 0 || k > limit) {
        throw InvalidArgument("fit_lsi: k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
    }
    const ThinSvd svd = jacobi_svd(tfidf.to_dense());

    LsiModel model;
    model.k = k;
    model.singular_values.assign(svd.s.begin(), svd.s.begin() + static_cast<std::ptrdiff_t>(k));
    model.term_topic = DenseMatrix(tfidf.cols(), k);
    for (std::size_t t = 0; t < tfidf.cols(); ++t) {
        for (std::size_t c = 0; c < k; ++c) model.term_topic(t, c) = svd.v(t, c);
    }
    return model;
}

std::vector<double> project_lsi(const SparseRow& row, const LsiModel& model) {
    std::vector<double> out(model.k, 0.0);
    for (std::size_t n = 0; n < row.nnz(); ++n) {
        if (row.indices[n] >= model.term_topic.rows()) {
            throw InvalidArgument("project_lsi: term index " + std::to_string(row.indices[n]) + " outside vocabulary of " +
                                  std::to_string(model.term_topic.rows()));
        }
        kernels::axpy(row.values[n], model.term_topic.row(row.indices[n]), out);
    }
    return out;
}

std::vector<double> project_lsi(std::span<const double> row, const LsiModel& model) {
    if (row.size() != model.term_topic.rows()) {
        throw InvalidArgument("project_lsi: row has " + std::to_string(row.size()) + " columns, model expects " +
                              std::to_string(model.term_topic.rows()));
    }
    std::vector<double> out(model.k, 0.0);
    for (std::size_t t = 0; t < row.size(); ++t) {
        if (row[t] != 0.0) kernels::axpy(row[t], model.term_topic.row(t), out);
    }
    return out;
}

FeatureMatrix project_lsi(const FeatureMatrix& rows, const LsiModel& model) {
    if (rows.cols() != model.term_topic.rows()) {
        throw InvalidArgument("project_lsi: matrix has " + std::to_string(rows.cols()) + " columns, model expects " +
                              std::to_string(model.term_topic.rows()));
    }
    DenseMatrix out(rows.rows(), model.k);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const auto projected = rows.is_sparse() ? project_lsi(rows.sparse().row(r), model)
                                                : project_lsi(rows.dense().row(r), model);
        std::ranges::copy(projected, out.row(r).begin());
    }
    return FeatureMatrix{std::move(out), rows.row_ids};
}

}  // namespace attackmap::features

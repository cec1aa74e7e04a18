#include "attackmap/matrix.hpp"

#include <algorithm>

#include "attackmap/error.hpp"
#include "attackmap/kernels.hpp"

namespace attackmap {

void DenseMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw InvalidArgument("row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

std::size_t FeatureMatrix::rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, storage);
}

std::size_t FeatureMatrix::cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, storage);
}

DenseMatrix FeatureMatrix::to_dense() const {
    if (!is_sparse()) return dense();
    const auto& s = sparse();
    DenseMatrix out(s.rows(), s.cols());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const auto& row = s.row(r);
        for (std::size_t k = 0; k < row.nnz(); ++k) out(r, row.indices[k]) = row.values[k];
    }
    return out;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.row_ids.reserve(rows.size());
    for (const auto r : rows) out.row_ids.push_back(r < row_ids.size() ? row_ids[r] : std::string());
    if (is_sparse()) {
        SparseMatrix m(cols());
        for (const auto r : rows) m.append_row(sparse().row(r));
        out.storage = std::move(m);
    } else {
        DenseMatrix m(rows.size(), cols());
        for (std::size_t i = 0; i < rows.size(); ++i) std::ranges::copy(dense().row(rows[i]), m.row(i).begin());
        out.storage = std::move(m);
    }
    return out;
}

std::vector<double> densify(const SparseRow& row, std::size_t cols) {
    std::vector<double> out(cols, 0.0);
    for (std::size_t k = 0; k < row.nnz(); ++k) out[row.indices[k]] = row.values[k];
    return out;
}

SparseRow sparsify(std::span<const double> row) {
    SparseRow out;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] != 0.0) {
            out.indices.push_back(static_cast<std::uint32_t>(c));
            out.values.push_back(row[c]);
        }
    }
    return out;
}

double dot(const SparseRow& a, const SparseRow& b) {
    double sum = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.nnz() && j < b.nnz()) {
        if (a.indices[i] == b.indices[j]) {
            sum += a.values[i++] * b.values[j++];
        } else if (a.indices[i] < b.indices[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return sum;
}

double squared_norm(const SparseRow& a) {
    double sum = 0.0;
    for (const double v : a.values) sum += v * v;
    return sum;
}

double squared_distance(const SparseRow& a, const SparseRow& b) {
    double sum = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.nnz() || j < b.nnz()) {
        double d = 0.0;
        if (j >= b.nnz() || (i < a.nnz() && a.indices[i] < b.indices[j])) {
            d = a.values[i++];
        } else if (i >= a.nnz() || b.indices[j] < a.indices[i]) {
            d = b.values[j++];
        } else {
            d = a.values[i++] - b.values[j++];
        }
        sum += d * d;
    }
    return sum;
}

double row_squared_distance(const FeatureMatrix& a, std::size_t i, const FeatureMatrix& b, std::size_t j) {
    if (a.is_sparse() && b.is_sparse()) return squared_distance(a.sparse().row(i), b.sparse().row(j));
    if (!a.is_sparse() && !b.is_sparse()) return kernels::squared_distance(a.dense().row(i), b.dense().row(j));
    const auto& dense = a.is_sparse() ? b.dense() : a.dense();
    const auto& sparse_row = a.is_sparse() ? a.sparse().row(i) : b.sparse().row(j);
    const auto dense_row = dense.row(a.is_sparse() ? j : i);
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t c = 0; c < dense_row.size(); ++c) {
        double d = dense_row[c];
        if (k < sparse_row.nnz() && sparse_row.indices[k] == c) d -= sparse_row.values[k++];
        sum += d * d;
    }
    return sum;
}

}  // namespace attackmap

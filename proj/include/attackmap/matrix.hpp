#pragma once

// Row-oriented feature storage shared by featurizers and learners.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace attackmap {

/// Sparse row with strictly increasing column indices.
struct SparseRow {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    std::size_t nnz() const { return indices.size(); }
    bool operator==(const SparseRow&) const = default;
};

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    void append_row(std::span<const double> values);

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class SparseMatrix {
public:
    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t cols) : cols_(cols) {}
    SparseMatrix(std::size_t cols, std::vector<SparseRow> rows) : cols_(cols), rows_(std::move(rows)) {}

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    const SparseRow& row(std::size_t r) const { return rows_[r]; }
    void append_row(SparseRow row) { rows_.push_back(std::move(row)); }

    bool operator==(const SparseMatrix&) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<SparseRow> rows_;
};

/// Document features for one method. Row order follows `row_ids`.
struct FeatureMatrix {
    std::variant<DenseMatrix, SparseMatrix> storage;
    std::vector<std::string> row_ids;

    std::size_t rows() const;
    std::size_t cols() const;
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage); }
    const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage); }
    const SparseMatrix& sparse() const { return std::get<SparseMatrix>(storage); }

    DenseMatrix to_dense() const;
    /// Subset of rows, in the order given.
    FeatureMatrix select(std::span<const std::size_t> rows) const;
};

std::vector<double> densify(const SparseRow& row, std::size_t cols);
SparseRow sparsify(std::span<const double> row);

double dot(const SparseRow& a, const SparseRow& b);
double squared_norm(const SparseRow& a);
double squared_distance(const SparseRow& a, const SparseRow& b);

/// Squared Euclidean distance between row i of a and row j of b (same width).
double row_squared_distance(const FeatureMatrix& a, std::size_t i, const FeatureMatrix& b, std::size_t j);

}  // namespace attackmap

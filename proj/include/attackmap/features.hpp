#pragma once

// Document featurizers: TF-IDF, LSI over TF-IDF, and precomputed sentence
// embeddings read from the exchange file format.

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "attackmap/matrix.hpp"
#include "attackmap/textprep.hpp"

namespace attackmap::features {

struct Vocabulary {
    std::map<std::string, std::size_t> term_to_index;  // indices follow lexicographic term order
    std::vector<std::string> terms;                    // index -> term
    std::vector<std::size_t> document_frequency;
    std::size_t corpus_size = 0;

    std::size_t size() const { return terms.size(); }
};

struct TfidfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;  // ln((1 + N) / (1 + df)) + 1
};

TfidfModel fit_tfidf(std::span<const textprep::TokenList> corpus);

/// Raw counts times idf, L2-normalized. Out-of-vocabulary terms are ignored;
/// a row with no known terms stays all-zero.
SparseRow transform_tfidf(const textprep::TokenList& doc, const TfidfModel& model);
FeatureMatrix transform_tfidf(std::span<const textprep::TokenList> docs, const TfidfModel& model,
                              std::vector<std::string> row_ids = {});

struct LsiModel {
    std::size_t k = 0;
    DenseMatrix term_topic;               // V x k, orthonormal columns
    std::vector<double> singular_values;  // k, nonincreasing
};

inline constexpr std::size_t kDefaultLsiTopics = 100;

/// min(requested, min(rows, cols) - 1), at least 1.
std::size_t default_lsi_rank(std::size_t rows, std::size_t cols, std::size_t requested = kDefaultLsiTopics);

/// Rank-k truncated SVD of the document-term matrix. Requires 1 <= k <= min(rows, cols).
LsiModel fit_lsi(const FeatureMatrix& tfidf, std::size_t k);

std::vector<double> project_lsi(const SparseRow& row, const LsiModel& model);
std::vector<double> project_lsi(std::span<const double> row, const LsiModel& model);
FeatureMatrix project_lsi(const FeatureMatrix& rows, const LsiModel& model);

/// Singular value decomposition of a small dense matrix, A = U diag(s) V^T,
/// via one-sided Jacobi rotations. U is rows x r, V is cols x r with
/// r = min(rows, cols); singular values are sorted nonincreasing.
struct ThinSvd {
    DenseMatrix u;
    std::vector<double> s;
    DenseMatrix v;
};
ThinSvd jacobi_svd(const DenseMatrix& a);

struct EmbeddingRecord {
    std::string doc_id;
    std::string model;
    std::vector<double> vector;
};

/// Reads the line-delimited exchange file and orders rows by `expected_ids`.
/// Throws on a missing id (naming it), duplicate ids, mixed models or
/// inconsistent vector lengths. Extra ids in the file are ignored.
FeatureMatrix load_embeddings(const std::filesystem::path& file, std::span<const std::string> expected_ids,
                              std::string* model_out = nullptr);

void write_embeddings(const std::filesystem::path& file, const std::vector<EmbeddingRecord>& records);

}  // namespace attackmap::features

#pragma once

// Scenario construction, the K=5 shard-rotation fold plan, metrics, the
// benchmark grid and its "A-B(C)" report.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attackmap/corpus.hpp"
#include "attackmap/learn.hpp"
#include "attackmap/matrix.hpp"
#include "attackmap/textprep.hpp"

namespace attackmap::eval {

enum class Method { tfidf, lsi, minilm, roberta, bert };

inline constexpr Method kAllMethods[] = {Method::tfidf, Method::lsi, Method::minilm, Method::roberta, Method::bert};

std::string_view method_name(Method method);          // tfidf, lsi, minilm, roberta, bert
std::string_view method_display_name(Method method);  // TF-IDF, LSI, MiniLM, RoBERTa, BERT
std::optional<Method> parse_method(std::string_view name);
bool is_transformer(Method method);

inline constexpr std::size_t kFolds = 5;
inline constexpr std::size_t kShards = 10;

/// Labels by descending instance count, ties by lexicographic id.
std::vector<std::string> rank_labels_by_frequency(std::span<const corpus::LabeledDocument> dataset);

/// Instances whose label is among the n most frequent, in dataset order.
std::vector<corpus::LabeledDocument> select_top_n(std::span<const corpus::LabeledDocument> dataset, std::size_t n);

struct Fold {
    std::vector<std::size_t> train;       // 8 shards
    std::vector<std::size_t> validation;  // shard i + 5
    std::vector<std::size_t> test;        // shard i
};

struct FoldPlan {
    std::vector<Fold> folds;
};

/// Shuffles each class (by seed), deals all rows round-robin into 10 shards
/// continuing the rotation across classes, then builds K=5 folds: fold i
/// tests on shard i, validates on shard i+5 and trains on the other eight.
FoldPlan make_folds(std::span<const int> labels, std::uint64_t seed);

struct MetricsCell {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;

    bool operator==(const MetricsCell&) const = default;
};

inline constexpr std::array<std::string_view, 4> kMetricNames{"precision", "recall", "f1", "auc"};
inline constexpr std::array<std::string_view, 4> kMetricDisplayNames{"Precision", "Recall", "F1 Score", "AUC"};
double metric_value(const MetricsCell& cell, std::size_t metric);

/// Macro precision/recall/F1 over the labels present in y_true or y_pred
/// (0/0 counts as 0), and macro one-vs-rest ROC AUC from `scores` (column c
/// scores label c) over labels with both positives and negatives in y_true,
/// ties sharing average rank. AUC is 0.5 when no label qualifies.
MetricsCell compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, const DenseMatrix& scores);

/// One benchmark cell: a (method, classifier, n, fold) evaluation.
struct Cell {
    std::string method;
    std::string classifier;
    std::size_t n = 0;
    std::size_t fold = 0;
    MetricsCell metrics;

    bool operator==(const Cell&) const = default;
};

struct BenchmarkConfig {
    std::vector<Method> methods;
    std::vector<learn::Algorithm> classifiers;
    std::vector<std::size_t> n_values;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;  // 0 = hardware concurrency
    std::map<Method, std::filesystem::path> embedding_files;
    std::size_t lsi_topics = 100;
    std::size_t smote_neighbors = 5;
    learn::TrainConfig base;  // per-algorithm hyperparameters; algorithm and seed are set per cell
    std::function<void(const Cell&)> on_cell;  // progress hook, called serially
};

struct FoldFeatures {
    FeatureMatrix train;
    FeatureMatrix validation;
    FeatureMatrix test;
    std::size_t vocabulary_size = 0;  // TF-IDF vocabulary fitted on the training rows
};

/// Featurizes one fold. `tokens` and `embeddings` are indexed like the fold's
/// row indices; `embeddings` is required for transformer methods only.
FoldFeatures featurize_fold(Method method, std::span<const textprep::TokenList> tokens,
                            const FeatureMatrix* embeddings, const Fold& fold,
                            std::size_t lsi_topics = 100);

/// Seed for one cell, independent of scheduling.
std::uint64_t cell_seed(std::uint64_t master, Method method, learn::Algorithm classifier, std::size_t n, std::size_t fold);

/// Runs every (method, classifier, n, fold) cell. Features are fitted on the
/// training rows of each fold only and SMOTE touches training rows only.
/// Result order: method, classifier, n, fold (config order for each).
std::vector<Cell> run_benchmark(std::span<const corpus::LabeledDocument> dataset, const BenchmarkConfig& config);

/// Transformer methods requested without an embedding file.
std::vector<Method> missing_embeddings(const BenchmarkConfig& config);

// ---------------------------------------------------------------- reporting

struct Summary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

struct ReportRow {
    std::string method;
    std::string classifier;
    std::array<Summary, 4> metrics;
};

struct ReportTable {
    std::vector<ReportRow> rows;  // first-appearance order of (method, classifier)
};

ReportTable aggregate(std::span<const Cell> cells);

/// Integer percentage, rounded half up.
long percent(double value);
/// "A-B(C)".
std::string render_summary(const Summary& summary);

std::string render_table_markdown(const ReportTable& table);
std::string render_table_csv(const ReportTable& table);

/// Rounds every metric to the 6 decimals the results CSV stores.
std::vector<Cell> quantize(std::span<const Cell> cells);

std::string results_csv(std::span<const Cell> cells);
/// Throws ParseError with the line number on malformed input, Error("no cells") when empty.
std::vector<Cell> parse_results_csv(std::string_view text, std::string_view source = "results.csv");
std::vector<Cell> read_results_csv(const std::filesystem::path& file);

/// Per metric: columns are methods, rows are that method's cells in order.
std::string distribution_csv(std::span<const Cell> cells, std::size_t metric);

enum class TableFormat { csv, markdown };

/// Writes results.csv, table.csv and/or table.md, and distribution_<metric>.csv
/// into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_report(std::span<const Cell> cells, const ReportTable& table,
                                               const std::filesystem::path& dir,
                                               std::span<const TableFormat> formats,
                                               bool write_results = true);

}  // namespace attackmap::eval

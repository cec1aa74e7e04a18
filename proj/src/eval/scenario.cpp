#include <algorithm>
#include <map>
#include <unordered_set>

#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"
#include "attackmap/rng.hpp"

namespace attackmap::eval {

namespace {

struct MethodInfo {
    Method method;
    std::string_view name;
    std::string_view display;
};

constexpr MethodInfo kMethodTable[] = {
    {Method::tfidf, "tfidf", "TF-IDF"},    {Method::lsi, "lsi", "LSI"},
    {Method::minilm, "minilm", "MiniLM"},  {Method::roberta, "roberta", "RoBERTa"},
    {Method::bert, "bert", "BERT"},
};

const MethodInfo& info(Method method) {
    for (const auto& entry : kMethodTable)
        if (entry.method == method) return entry;
    throw Error("unknown method");
}

}  // namespace

std::string_view method_name(Method method) { return info(method).name; }
std::string_view method_display_name(Method method) { return info(method).display; }

std::optional<Method> parse_method(std::string_view name) {
    std::string lower(name);
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "tf-idf") lower = "tfidf";
    for (const auto& entry : kMethodTable)
        if (entry.name == lower) return entry.method;
    return std::nullopt;
}

bool is_transformer(Method method) { return method != Method::tfidf && method != Method::lsi; }

std::vector<std::string> rank_labels_by_frequency(std::span<const corpus::LabeledDocument> dataset) {
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : dataset) ++counts[doc.label];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    // map order is lexicographic, so a stable sort keeps ties in id order
    std::ranges::stable_sort(ranked, [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> labels;
    labels.reserve(ranked.size());
    for (auto& [label, count] : ranked) labels.push_back(std::move(label));
    return labels;
}

std::vector<corpus::LabeledDocument> select_top_n(std::span<const corpus::LabeledDocument> dataset, std::size_t n) {
    const auto ranked = rank_labels_by_frequency(dataset);
    if (n < 2) throw InvalidArgument("n must be at least 2");
    if (n > ranked.size())
        throw InvalidArgument("n = " + std::to_string(n) + " exceeds the " + std::to_string(ranked.size()) +
                              " distinct labels in the dataset");
    const std::unordered_set<std::string> keep(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<corpus::LabeledDocument> out;
    for (const auto& doc : dataset)
        if (keep.contains(doc.label)) out.push_back(doc);
    return out;
}

FoldPlan make_folds(std::span<const int> labels, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, rows] : by_class)
        if (rows.size() < kFolds)
            throw InvalidArgument("class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                                  " instances; at least " + std::to_string(kFolds) + " are needed");

    Rng rng(seed);
    std::array<std::vector<std::size_t>, kShards> shards;
    std::size_t dealt = 0;
    for (auto& [label, rows] : by_class) {
        rng.shuffle(std::span<std::size_t>(rows));
        for (const std::size_t row : rows) shards[dealt++ % kShards].push_back(row);
    }

    FoldPlan plan;
    for (std::size_t i = 0; i < kFolds; ++i) {
        Fold fold;
        fold.test = shards[i];
        fold.validation = shards[i + kFolds];
        for (std::size_t s = 0; s < kShards; ++s)
            if (s != i && s != i + kFolds) fold.train.insert(fold.train.end(), shards[s].begin(), shards[s].end());
        std::ranges::sort(fold.train);
        std::ranges::sort(fold.validation);
        std::ranges::sort(fold.test);
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

}  // namespace attackmap::eval

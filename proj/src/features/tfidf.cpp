#include <cmath>
#include <set>

#include "attackmap/error.hpp"
#include "attackmap/features.hpp"

namespace attackmap::features {

TfidfModel fit_tfidf(std::span<const textprep::TokenList> corpus) {
    if (corpus.empty()) throw InvalidArgument("fit_tfidf: empty corpus");

    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus) {
        const std::set<std::string_view> unique(doc.begin(), doc.end());
        for (const auto term : unique) ++df[std::string(term)];
    }

    TfidfModel model;
    auto& vocab = model.vocabulary;
    vocab.corpus_size = corpus.size();
    const double n = static_cast<double>(corpus.size());
    for (const auto& [term, count] : df) {
        vocab.term_to_index.emplace(term, vocab.terms.size());
        vocab.terms.push_back(term);
        vocab.document_frequency.push_back(count);
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return model;
}

SparseRow transform_tfidf(const textprep::TokenList& doc, const TfidfModel& model) {
    std::map<std::size_t, double> counts;
    for (const auto& token : doc) {
        const auto it = model.vocabulary.term_to_index.find(token);
        if (it != model.vocabulary.term_to_index.end()) counts[it->second] += 1.0;
    }
    SparseRow row;
    double norm2 = 0.0;
    for (const auto& [index, count] : counts) {
        const double w = count * model.idf[index];
        row.indices.push_back(static_cast<std::uint32_t>(index));
        row.values.push_back(w);
        norm2 += w * w;
    }
    if (norm2 > 0.0) {
        const double norm = std::sqrt(norm2);
        for (auto& v : row.values) v /= norm;
    }
    return row;
}

FeatureMatrix transform_tfidf(std::span<const textprep::TokenList> docs, const TfidfModel& model,
                              std::vector<std::string> row_ids) {
    SparseMatrix m(model.vocabulary.size());
    for (const auto& doc : docs) m.append_row(transform_tfidf(doc, model));
    return FeatureMatrix{std::move(m), std::move(row_ids)};
}

}  // namespace attackmap::features

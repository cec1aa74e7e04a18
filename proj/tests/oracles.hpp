#pragma once

// Independent reference implementations used as test oracles. Deliberately
// naive: loops over definitions, no shared code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "attackmap/eval.hpp"
#include "attackmap/matrix.hpp"
#include "attackmap/rng.hpp"
#include "attackmap/textprep.hpp"

namespace oracle {

inline std::vector<attackmap::textprep::TokenList> random_corpus(attackmap::Rng& rng) {
    const std::size_t docs = 1 + rng.below(10), terms = 1 + rng.below(15);
    std::vector<attackmap::textprep::TokenList> corpus(docs);
    for (auto& doc : corpus)
        for (std::size_t k = rng.below(12); k > 0; --k) doc.push_back("t" + std::to_string(rng.below(terms)));
    if (corpus.front().empty()) corpus.front().push_back("t0");
    return corpus;
}

// term -> weight per document
inline std::vector<std::map<std::string, double>> tfidf(const std::vector<attackmap::textprep::TokenList>& corpus) {
    std::set<std::string> vocab;
    for (const auto& d : corpus) vocab.insert(d.begin(), d.end());
    const double n = static_cast<double>(corpus.size());
    std::vector<std::map<std::string, double>> rows(corpus.size());
    for (const auto& term : vocab) {
        double df = 0;
        for (const auto& d : corpus) df += std::find(d.begin(), d.end(), term) != d.end();
        const double idf = std::log((1 + n) / (1 + df)) + 1;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            double count = 0;
            for (const auto& t : corpus[i]) count += t == term;
            if (count > 0) rows[i][term] = count * idf;
        }
    }
    for (auto& row : rows) {
        double norm = 0;
        for (const auto& [t, v] : row) norm += v * v;
        for (auto& [t, v] : row) v /= std::sqrt(norm);
    }
    return rows;
}

inline attackmap::eval::MetricsCell metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                            const attackmap::DenseMatrix& scores) {
    std::set<int> labels(y_true.begin(), y_true.end());
    labels.insert(y_pred.begin(), y_pred.end());
    attackmap::eval::MetricsCell m;
    for (const int c : labels) {
        int tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            tp += y_true[i] == c && y_pred[i] == c;
            predicted += y_pred[i] == c;
            actual += y_true[i] == c;
        }
        const double p = predicted ? static_cast<double>(tp) / predicted : 0.0;
        const double r = actual ? static_cast<double>(tp) / actual : 0.0;
        m.precision += p;
        m.recall += r;
        m.f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    m.precision /= static_cast<double>(labels.size());
    m.recall /= static_cast<double>(labels.size());
    m.f1 /= static_cast<double>(labels.size());

    // AUC as the fraction of correctly ordered positive/negative pairs, ties half.
    double sum = 0;
    int used = 0;
    for (std::size_t c = 0; c < scores.cols(); ++c) {
        double good = 0, pairs = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_true[i] != static_cast<int>(c)) continue;
            for (std::size_t j = 0; j < y_true.size(); ++j) {
                if (y_true[j] == static_cast<int>(c)) continue;
                pairs += 1;
                good += scores(i, c) > scores(j, c) ? 1.0 : scores(i, c) == scores(j, c) ? 0.5 : 0.0;
            }
        }
        if (pairs > 0) {
            sum += good / pairs;
            ++used;
        }
    }
    m.auc = used ? sum / used : 0.5;
    return m;
}

inline double segment_distance(std::span<const double> p, std::span<const double> a, std::span<const double> b) {
    double ab2 = 0, t = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ab2 += (b[i] - a[i]) * (b[i] - a[i]);
        t += (p[i] - a[i]) * (b[i] - a[i]);
    }
    t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = a[i] + t * (b[i] - a[i]);
        d2 += (p[i] - q) * (p[i] - q);
    }
    return std::sqrt(d2);
}

// The k nearest same-class rows of `row`, brute force.
inline std::vector<std::size_t> class_neighbors(const attackmap::DenseMatrix& x, std::span<const int> y, std::size_t row,
                                                std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (j == row || y[j] != y[row]) continue;
        double s = 0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += (x(row, c) - x(j, c)) * (x(row, c) - x(j, c));
        d.emplace_back(s, j);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, d.size()); ++i) out.push_back(d[i].second);
    return out;
}

// Distance from each synthetic row (index >= originals) to the nearest
// source-to-neighbor segment of its class; the worst case over all rows.
inline double worst_smote_segment_distance(const attackmap::DenseMatrix& original, std::span<const int> y,
                                           const attackmap::DenseMatrix& out, std::span<const int> out_y, std::size_t k) {
    double worst = 0;
    for (std::size_t r = y.size(); r < out_y.size(); ++r) {
        double best = INFINITY;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] != out_y[r]) continue;
            for (const std::size_t j : class_neighbors(original, y, i, k))
                best = std::min(best, segment_distance(out.row(r), original.row(i), original.row(j)));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

inline Eigen::MatrixXd to_eigen(const attackmap::DenseMatrix& m) {
    Eigen::MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    return e;
}

}  // namespace oracle

#include <algorithm>
#include <numeric>
#include <set>

#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"

namespace attackmap::eval {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Mann-Whitney form of the binary AUC with average ranks for ties.
double binary_auc(std::span<const double> scores, std::span<const char> positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (positive[order[t]]) {
                positive_rank_sum += rank;
                ++positives;
            }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double q = static_cast<double>(n - positives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

}  // namespace

double metric_value(const MetricsCell& cell, std::size_t metric) {
    switch (metric) {
        case 0: return cell.precision;
        case 1: return cell.recall;
        case 2: return cell.f1;
        case 3: return cell.auc;
        default: throw InvalidArgument("metric index out of range");
    }
}

MetricsCell compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, const DenseMatrix& scores) {
    if (y_true.size() != y_pred.size() || y_true.size() != scores.rows())
        throw InvalidArgument("compute_metrics: y_true, y_pred and scores disagree in length");
    if (y_true.empty()) throw InvalidArgument("compute_metrics: no rows");

    MetricsCell out;
    std::set<int> present(y_true.begin(), y_true.end());
    present.insert(y_pred.begin(), y_pred.end());
    for (const int label : present) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == label, p = y_pred[i] == label;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        const double precision = ratio(tp, tp + fp);
        const double recall = ratio(tp, tp + fn);
        out.precision += precision;
        out.recall += recall;
        out.f1 += ratio(2.0 * precision * recall, precision + recall);
    }
    const double classes = static_cast<double>(present.size());
    out.precision /= classes;
    out.recall /= classes;
    out.f1 /= classes;

    double auc_sum = 0.0;
    std::size_t auc_classes = 0;
    std::vector<double> column(y_true.size());
    std::vector<char> positive_flags(y_true.size());
    for (std::size_t c = 0; c < scores.cols(); ++c) {
        std::size_t positives = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            positive_flags[i] = y_true[i] == static_cast<int>(c);
            positives += positive_flags[i];
            column[i] = scores(i, c);
        }
        if (positives == 0 || positives == y_true.size()) continue;
        auc_sum += binary_auc(column, positive_flags);
        ++auc_classes;
    }
    out.auc = auc_classes ? auc_sum / static_cast<double>(auc_classes) : 0.5;
    return out;
}

}  // namespace attackmap::eval

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_set>

#include "attackmap/corpus.hpp"

namespace attackmap::corpus {

namespace {

template <typename T>
void sort_unique(std::vector<T>& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

}  // namespace

LinkageGraph build_linkage(const std::vector<AttackPatternRecord>& patterns,
                           const std::vector<WeaknessRecord>& weaknesses,
                           const std::vector<VulnerabilityRecord>& vulnerabilities) {
    LinkageGraph graph;

    std::unordered_set<int> cwe_ids;
    cwe_ids.reserve(weaknesses.size());
    for (const auto& w : weaknesses) cwe_ids.insert(w.cwe_id);
    std::unordered_set<std::string_view> cve_ids;
    cve_ids.reserve(vulnerabilities.size());
    for (const auto& v : vulnerabilities) cve_ids.insert(v.cve_id);

    for (const auto& p : patterns) {
        for (const int cwe : p.related_weakness_ids) {
            if (cwe_ids.contains(cwe)) {
                graph.pattern_to_weakness.emplace_back(p.capec_id, cwe);
            } else {
                ++graph.dangling.pattern_to_weakness;
            }
        }
    }

    // CWE -> CVE is the union of both reference directions.
    for (const auto& w : weaknesses) {
        for (const auto& cve : w.observed_cve_ids) {
            if (cve_ids.contains(cve)) {
                graph.weakness_to_vulnerability.emplace_back(w.cwe_id, cve);
            } else {
                ++graph.dangling.weakness_to_vulnerability;
            }
        }
    }
    for (const auto& v : vulnerabilities) {
        for (const int cwe : v.referenced_cwe_ids) {
            if (cwe_ids.contains(cwe)) {
                graph.weakness_to_vulnerability.emplace_back(cwe, v.cve_id);
            } else {
                ++graph.dangling.vulnerability_to_weakness;
            }
        }
    }
    sort_unique(graph.pattern_to_weakness);
    sort_unique(graph.weakness_to_vulnerability);

    // Both edge lists are sorted by CWE id on one side; index the CVE side by CWE.
    std::map<int, std::pair<std::size_t, std::size_t>> cve_range;
    for (std::size_t i = 0; i < graph.weakness_to_vulnerability.size();) {
        const int cwe = graph.weakness_to_vulnerability[i].first;
        std::size_t j = i;
        while (j < graph.weakness_to_vulnerability.size() && graph.weakness_to_vulnerability[j].first == cwe) ++j;
        cve_range.emplace(cwe, std::make_pair(i, j));
        i = j;
    }
    for (const auto& [capec, cwe] : graph.pattern_to_weakness) {
        const auto it = cve_range.find(cwe);
        if (it == cve_range.end()) continue;
        for (std::size_t k = it->second.first; k < it->second.second; ++k) {
            graph.pattern_to_vulnerability.emplace_back(capec, graph.weakness_to_vulnerability[k].second);
        }
    }
    sort_unique(graph.pattern_to_vulnerability);
    return graph;
}

std::set<int> LinkageGraph::linked_patterns() const {
    std::set<int> out;
    for (const auto& edge : pattern_to_vulnerability) out.insert(edge.first);
    return out;
}

std::set<int> LinkageGraph::linked_weaknesses() const {
    std::set<int> with_pattern;
    for (const auto& edge : pattern_to_weakness) with_pattern.insert(edge.second);
    std::set<int> out;
    for (const auto& edge : weakness_to_vulnerability) {
        if (with_pattern.contains(edge.first)) out.insert(edge.first);
    }
    return out;
}

std::set<std::string> LinkageGraph::linked_vulnerabilities() const {
    std::set<std::string> out;
    for (const auto& edge : pattern_to_vulnerability) out.insert(edge.second);
    return out;
}

std::array<StatsRow, 3> linkage_stats(const LinkageGraph& graph, const Snapshot& snapshot) {
    auto row = [](std::string name, std::size_t linked, std::size_t total) {
        return StatsRow{std::move(name), linked, total - linked, total};
    };
    return {
        row("Attack Patterns", graph.linked_patterns().size(), snapshot.patterns.size()),
        row("CWE reports", graph.linked_weaknesses().size(), snapshot.weaknesses.size()),
        row("CVE reports", graph.linked_vulnerabilities().size(), snapshot.vulnerabilities.size()),
    };
}

std::string render_stats(const std::array<StatsRow, 3>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "" << std::right << std::setw(10) << "Linked" << std::setw(12) << "Not linked"
        << std::setw(10) << "Total" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(18) << r.repository << std::right << std::setw(10) << r.linked << std::setw(12)
            << r.not_linked << std::setw(10) << r.total << '\n';
    }
    return out.str();
}

}  // namespace attackmap::corpus

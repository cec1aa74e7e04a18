// Writes the bundled CAPEC/CWE/NVD snapshot (patterns.jsonl, weaknesses.jsonl,
// vulns.jsonl). The live MITRE feeds are not redistributable here, so the
// snapshot is generated from a fixed seed: record counts and linkage match the
// target marginals, and pattern text is topic-structured so the top CVE
// classes are learnable but overlap.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "attackmap/corpus.hpp"
#include "attackmap/rng.hpp"

namespace {

using attackmap::Rng;
using namespace attackmap::corpus;

constexpr std::size_t kPatterns = 559;
constexpr std::size_t kLinkedPatterns = 143;
constexpr std::size_t kWeaknesses = 935;
constexpr std::size_t kMinorWeaknesses = 143;  // linked, besides the hubs
constexpr std::size_t kPatternOnlyWeaknesses = 210;
constexpr std::size_t kVulnOnlyWeaknesses = 340;
constexpr std::size_t kVulns = 295604;
constexpr std::size_t kLinkedVulns = 685;

// One hub weakness per top CVE; its pattern cluster is a core plus a few
// patterns borrowed from other cores.
constexpr std::array<std::size_t, 6> kCore{26, 23, 21, 18, 16, 14};
constexpr std::array<std::size_t, 6> kBorrowed{5, 5, 4, 4, 4, 4};
constexpr std::size_t kHubs = kCore.size();
constexpr std::size_t kTopics = 12;

constexpr double kDefaultTopicShare = 0.22;

const std::array<std::string_view, 24> kFunctionWords{
    "the", "a", "an", "of", "to", "in", "by", "with", "and", "or", "that", "which",
    "is", "are", "be", "can", "this", "from", "on", "for", "its", "their", "may", "into"};

class Lexicon {
public:
    explicit Lexicon(Rng& rng) {
        static constexpr std::string_view onset[] = {"b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r",
                                                     "s", "t", "v", "z", "br", "cr", "dr", "gr", "pl", "st", "tr", "sk"};
        static constexpr std::string_view nucleus[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
        static constexpr std::string_view coda[] = {"", "", "n", "r", "l", "x", "m", "nt", "rk", "st"};
        std::set<std::string> seen;
        const auto make = [&] {
            while (true) {
                std::string w;
                const std::size_t syllables = 2 + rng.below(2);
                for (std::size_t s = 0; s < syllables; ++s) {
                    w += onset[rng.below(std::size(onset))];
                    w += nucleus[rng.below(std::size(nucleus))];
                }
                w += coda[rng.below(std::size(coda))];
                if (w.size() >= 5 && seen.insert(w).second) return w;
            }
        };
        for (std::size_t i = 0; i < 1500; ++i) general_.push_back(make());
        for (std::size_t t = 0; t < kTopics; ++t) {
            topics_.emplace_back();
            for (std::size_t i = 0; i < 30; ++i) topics_.back().push_back(make());
        }
    }

    // Zipf-like draw from the shared background vocabulary.
    const std::string& general(Rng& rng) const {
        const double u = rng.uniform();
        const auto index = static_cast<std::size_t>(std::pow(u, 2.5) * static_cast<double>(general_.size()));
        return general_[std::min(index, general_.size() - 1)];
    }

    const std::string& topic(Rng& rng, std::size_t t) const { return topics_[t][rng.below(topics_[t].size())]; }

    // A few sentences; each content word comes from one of `topics` with
    // probability `share`, otherwise from the background.
    std::string text(Rng& rng, std::size_t min_words, std::size_t max_words, std::span<const std::size_t> topics,
                     double share) const {
        const std::size_t words = min_words + rng.below(max_words - min_words + 1);
        std::string out;
        bool sentence_start = true;
        for (std::size_t i = 0; i < words; ++i) {
            std::string w;
            if (rng.uniform() < 0.3) {
                w = kFunctionWords[rng.below(kFunctionWords.size())];
            } else if (!topics.empty() && rng.uniform() < share) {
                w = topic(rng, topics[rng.below(topics.size())]);
            } else {
                w = general(rng);
            }
            if (rng.uniform() < 0.02) w += std::to_string(rng.below(100));
            if (sentence_start) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            if (!out.empty()) out += ' ';
            out += w;
            sentence_start = false;
            if (i + 1 < words && rng.uniform() < 0.08) {
                out += rng.uniform() < 0.8 ? "." : ",";
                sentence_start = out.back() == '.';
            }
        }
        return out + ".";
    }

    std::string name(Rng& rng, std::size_t words) const {
        std::string out;
        for (std::size_t i = 0; i < words; ++i) {
            std::string w = general(rng);
            w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            out += (i ? " " : "") + w;
        }
        return out;
    }

private:
    std::vector<std::string> general_;
    std::vector<std::vector<std::string>> topics_;
};

// `count` distinct integers from [lo, hi], shuffled.
std::vector<int> sample_ids(Rng& rng, std::size_t count, int lo, int hi) {
    std::vector<int> pool(static_cast<std::size_t>(hi - lo + 1));
    std::iota(pool.begin(), pool.end(), lo);
    rng.shuffle(std::span<int>(pool));
    pool.resize(count);
    return pool;
}

std::vector<std::string> make_cve_ids(Rng& rng) {
    std::vector<std::string> ids;
    ids.reserve(kVulns);
    constexpr int kFirstYear = 1999, kYears = 25;
    for (int y = 0; y < kYears; ++y) {
        // later years carry more reports
        const std::size_t begin = kVulns * static_cast<std::size_t>(y * y) / (kYears * kYears);
        const std::size_t end = kVulns * static_cast<std::size_t>((y + 1) * (y + 1)) / (kYears * kYears);
        std::size_t number = 1000;
        for (std::size_t i = begin; i < end; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "CVE-%d-%04zu", kFirstYear + y, number);
            ids.emplace_back(buf);
            number += 1 + rng.below(3);
        }
    }
    return ids;
}

Snapshot generate(std::uint64_t seed, double topic_share) {
    Rng rng(seed);
    const Lexicon lexicon(rng);

    auto capec_ids = sample_ids(rng, kPatterns, 1, 720);
    auto cwe_ids = sample_ids(rng, kWeaknesses, 1, 1450);
    const auto cve_ids = make_cve_ids(rng);

    std::vector<std::size_t> linked_cves(kVulns);
    std::iota(linked_cves.begin(), linked_cves.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(linked_cves));
    linked_cves.resize(kLinkedVulns);
    std::vector<char> cve_is_linked(kVulns, 0);
    for (const std::size_t i : linked_cves) cve_is_linked[i] = 1;

    // Weakness roles, by position in cwe_ids.
    const std::size_t hub_begin = 0, minor_begin = kHubs, pattern_only_begin = minor_begin + kMinorWeaknesses,
                      vuln_only_begin = pattern_only_begin + kPatternOnlyWeaknesses,
                      inert_begin = vuln_only_begin + kVulnOnlyWeaknesses;

    std::vector<AttackPatternRecord> patterns(kPatterns);
    std::vector<WeaknessRecord> weaknesses(kWeaknesses);
    std::vector<VulnerabilityRecord> vulns(kVulns);
    for (std::size_t i = 0; i < kPatterns; ++i) patterns[i].capec_id = capec_ids[i];
    for (std::size_t i = 0; i < kWeaknesses; ++i) {
        weaknesses[i].cwe_id = cwe_ids[i];
        weaknesses[i].name = lexicon.name(rng, 3 + rng.below(4));
    }
    for (std::size_t i = 0; i < kVulns; ++i) vulns[i].cve_id = cve_ids[i];

    // Connect weakness w and vulnerability v from one or both sides.
    const auto connect = [&](std::size_t w, std::size_t v) {
        const double r = rng.uniform();
        if (r < 0.7) weaknesses[w].observed_cve_ids.insert(cve_ids[v]);
        if (r >= 0.4) vulns[v].referenced_cwe_ids.insert(cwe_ids[w]);
    };

    // Linked patterns: positions [0, kLinkedPatterns). Topic per pattern.
    std::vector<std::vector<std::size_t>> pattern_topics(kPatterns);
    std::size_t next_pattern = 0;
    std::array<std::vector<std::size_t>, kHubs> cores;
    for (std::size_t h = 0; h < kHubs; ++h)
        for (std::size_t i = 0; i < kCore[h]; ++i) {
            cores[h].push_back(next_pattern);
            pattern_topics[next_pattern].push_back(h);
            ++next_pattern;
        }
    std::vector<std::size_t> peripheral;
    for (; next_pattern < kLinkedPatterns; ++next_pattern) {
        peripheral.push_back(next_pattern);
        pattern_topics[next_pattern].push_back(kHubs + rng.below(kTopics - kHubs));
    }

    for (std::size_t h = 0; h < kHubs; ++h) {
        std::vector<std::size_t> cluster = cores[h];
        std::vector<std::size_t> others;
        for (std::size_t g = 0; g < kHubs; ++g)
            if (g != h) others.insert(others.end(), cores[g].begin(), cores[g].end());
        rng.shuffle(std::span<std::size_t>(others));
        for (std::size_t i = 0; i < kBorrowed[h]; ++i) {
            cluster.push_back(others[i]);
            auto& topics = pattern_topics[others[i]];
            if (std::ranges::find(topics, h) == topics.end()) topics.push_back(h);
        }
        const std::size_t w = hub_begin + h;
        for (const std::size_t p : cluster) patterns[p].related_weakness_ids.insert(cwe_ids[w]);
        connect(w, linked_cves[h]);
    }

    // Minor linked weaknesses: 1-3 linked patterns each (every peripheral
    // pattern used at least once) and a share of the remaining linked CVEs.
    std::vector<std::size_t> minor_cves(linked_cves.begin() + kHubs, linked_cves.end());
    for (std::size_t m = 0; m < kMinorWeaknesses; ++m) {
        const std::size_t w = minor_begin + m;
        const std::size_t count = 1 + rng.below(3);
        std::set<std::size_t> chosen;
        if (m < peripheral.size()) chosen.insert(peripheral[m]);
        while (chosen.size() < count) chosen.insert(rng.below(kLinkedPatterns));
        for (const std::size_t p : chosen) patterns[p].related_weakness_ids.insert(cwe_ids[w]);
        connect(w, minor_cves[m]);
    }
    for (std::size_t i = kMinorWeaknesses; i < minor_cves.size(); ++i)
        connect(minor_begin + rng.below(kMinorWeaknesses), minor_cves[i]);
    for (std::size_t i = 0; i < minor_cves.size(); ++i)
        if (rng.uniform() < 0.08) connect(minor_begin + rng.below(kMinorWeaknesses), minor_cves[i]);

    // Weaknesses seen from patterns only.
    for (std::size_t p = 0; p < kPatterns; ++p) {
        const bool linked = p < kLinkedPatterns;
        const double r = rng.uniform();
        if (r < (linked ? 0.3 : 0.45)) {
            const std::size_t refs = 1 + rng.below(2);
            for (std::size_t i = 0; i < refs; ++i)
                patterns[p].related_weakness_ids.insert(cwe_ids[pattern_only_begin + rng.below(kPatternOnlyWeaknesses)]);
        } else if (r < (linked ? 0.33 : 0.55)) {
            patterns[p].related_weakness_ids.insert(2000 + static_cast<int>(rng.below(500)));  // not in the catalog
        }
        if (!linked) pattern_topics[p].push_back(rng.below(kTopics));
    }

    // Unlinked CVEs: some classified under vulnerability-only weaknesses.
    std::vector<std::size_t> unlinked_sample;
    for (std::size_t v = 0; v < kVulns; ++v) {
        if (cve_is_linked[v]) {
            if (rng.uniform() < 0.1) connect(vuln_only_begin + rng.below(kVulnOnlyWeaknesses), v);
            continue;
        }
        const double r = rng.uniform();
        if (r < 0.3) {
            connect(vuln_only_begin + rng.below(kVulnOnlyWeaknesses), v);
        } else if (r < 0.31) {
            vulns[v].referenced_cwe_ids.insert(2000 + static_cast<int>(rng.below(500)));
        }
    }
    // Observed examples pointing outside the snapshot.
    for (std::size_t w = 0; w < inert_begin; ++w)
        if (rng.uniform() < 0.05) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "CVE-2031-%05zu", 10000 + static_cast<std::size_t>(rng.below(80000)));
            weaknesses[w].observed_cve_ids.insert(buf);
        }

    for (std::size_t p = 0; p < kPatterns; ++p) {
        const bool shared = pattern_topics[p].size() > 1;
        patterns[p].name = lexicon.name(rng, 2 + rng.below(4));
        patterns[p].description = lexicon.text(rng, 35, 90, pattern_topics[p], shared ? topic_share * 0.8 : topic_share);
    }
    for (std::size_t v = 0; v < kVulns; ++v) vulns[v].description = lexicon.text(rng, 6, 14, {}, 0.0);

    const auto by_capec = [](const auto& a, const auto& b) { return a.capec_id < b.capec_id; };
    const auto by_cwe = [](const auto& a, const auto& b) { return a.cwe_id < b.cwe_id; };
    std::ranges::sort(patterns, by_capec);
    std::ranges::sort(weaknesses, by_cwe);
    return {std::move(patterns), std::move(weaknesses), std::move(vulns)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled snapshot"};
    std::string out;
    std::uint64_t seed = 20230417;
    app.add_option("--out", out, "output directory")->required();
    double topic_share = kDefaultTopicShare;
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--topic-share", topic_share, "share of pattern words drawn from the pattern's topics")
        ->check(CLI::Range(0.0, 1.0));
    CLI11_PARSE(app, argc, argv);

    try {
        write_snapshot(generate(seed, topic_share), out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "make_snapshot: %s\n", e.what());
        return 1;
    }
    return 0;
}

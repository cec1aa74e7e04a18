#pragma once

// MITRE feed ingestion and the CAPEC -> CWE -> CVE linkage.

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace attackmap::corpus {

struct AttackPatternRecord {
    int capec_id = 0;
    std::string name;
    std::string description;
    std::set<int> related_weakness_ids;

    bool operator==(const AttackPatternRecord&) const = default;
};

struct WeaknessRecord {
    int cwe_id = 0;
    std::string name;
    std::set<std::string> observed_cve_ids;

    bool operator==(const WeaknessRecord&) const = default;
};

struct VulnerabilityRecord {
    std::string cve_id;
    std::string description;
    std::set<int> referenced_cwe_ids;

    bool operator==(const VulnerabilityRecord&) const = default;
};

/// Records plus the entries the parser rejected.
template <typename Record>
struct ParseResult {
    std::vector<Record> records;
    std::size_t dropped_empty = 0;      // empty description (CAPEC only)
    std::size_t dropped_deprecated = 0; // Status="Deprecated" (CAPEC only)
    std::size_t skipped_invalid = 0;    // missing or malformed identifier
};

/// True for `CVE-YYYY-NNNN...` (four-digit year, at least four digits).
bool is_cve_id(std::string_view text);

/// Parses `CWE-<digits>`; returns 0 for markers such as NVD-CWE-noinfo.
int parse_cwe_ref(std::string_view text);

// Feed parsers. `source` names the input in error messages.
ParseResult<AttackPatternRecord> parse_capec(std::string_view xml, std::string_view source = "capec");
ParseResult<WeaknessRecord> parse_cwe(std::string_view xml, std::string_view source = "cwe");
ParseResult<VulnerabilityRecord> parse_cve_feed(std::string_view json, std::string_view source = "nvd");

struct Snapshot {
    std::vector<AttackPatternRecord> patterns;
    std::vector<WeaknessRecord> weaknesses;
    std::vector<VulnerabilityRecord> vulnerabilities;
};

/// Reads patterns.jsonl, weaknesses.jsonl and vulns.jsonl from `dir`.
Snapshot load_snapshot(const std::filesystem::path& dir);
void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir);

/// Parses a CAPEC XML file, a CWE XML file and every *.json NVD feed in
/// `nvd_dir` (sorted by file name). The three feeds are parsed concurrently.
Snapshot load_feeds(const std::filesystem::path& capec_xml, const std::filesystem::path& cwe_xml,
                    const std::filesystem::path& nvd_dir);

// Line-level codecs for the snapshot format.
std::string to_jsonl(const AttackPatternRecord& record);
std::string to_jsonl(const WeaknessRecord& record);
std::string to_jsonl(const VulnerabilityRecord& record);

struct DanglingCounts {
    std::size_t pattern_to_weakness = 0;
    std::size_t weakness_to_vulnerability = 0;
    std::size_t vulnerability_to_weakness = 0;
};

struct LinkageGraph {
    // All edge lists are sorted and duplicate-free.
    std::vector<std::pair<int, int>> pattern_to_weakness;
    std::vector<std::pair<int, std::string>> weakness_to_vulnerability;
    std::vector<std::pair<int, std::string>> pattern_to_vulnerability;
    DanglingCounts dangling;

    std::set<int> linked_patterns() const;
    std::set<int> linked_weaknesses() const;
    std::set<std::string> linked_vulnerabilities() const;
};

LinkageGraph build_linkage(const std::vector<AttackPatternRecord>& patterns,
                           const std::vector<WeaknessRecord>& weaknesses,
                           const std::vector<VulnerabilityRecord>& vulnerabilities);

struct LabeledDocument {
    std::string doc_id;
    int capec_id = 0;
    std::string text;
    std::string label;

    bool operator==(const LabeledDocument&) const = default;
};

std::string make_doc_id(int capec_id, std::string_view cve_id);

/// One document per derived (pattern, CVE) pair, ordered by (capec_id, label).
std::vector<LabeledDocument> derive_dataset(const LinkageGraph& graph,
                                            const std::vector<AttackPatternRecord>& patterns);

std::string to_jsonl(const LabeledDocument& doc);
void write_dataset(const std::vector<LabeledDocument>& docs, const std::filesystem::path& file);
std::vector<LabeledDocument> read_dataset(const std::filesystem::path& file);

struct StatsRow {
    std::string repository;
    std::size_t linked = 0;
    std::size_t not_linked = 0;
    std::size_t total = 0;
};

/// Rows in order: attack patterns, CWE reports, CVE reports.
std::array<StatsRow, 3> linkage_stats(const LinkageGraph& graph, const Snapshot& snapshot);

std::string render_stats(const std::array<StatsRow, 3>& rows);

}  // namespace attackmap::corpus

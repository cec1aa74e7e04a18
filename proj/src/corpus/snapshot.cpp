#include <json.hpp>

#include <algorithm>
#include <future>
#include <set>

#include "attackmap/corpus.hpp"
#include "../detail/io.hpp"

namespace attackmap::corpus {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string dump(const ordered_json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

const json& field(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(source, line, std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const json& value = field(obj, key, source, line);
    if (!value.is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
    return value.get<std::string>();
}

int id_field(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const json& value = field(obj, key, source, line);
    if (!value.is_number_integer() || value.get<long long>() <= 0 || value.get<long long>() > 1'000'000'000) {
        throw ParseError(source, line, std::string("field '") + key + "' must be a positive integer");
    }
    return static_cast<int>(value.get<long long>());
}

std::set<int> int_set(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const json& value = field(obj, key, source, line);
    if (!value.is_array()) throw ParseError(source, line, std::string("field '") + key + "' must be an array");
    std::set<int> out;
    for (const json& item : value) {
        if (!item.is_number_integer() || item.get<long long>() <= 0) {
            throw ParseError(source, line, std::string("field '") + key + "' must hold positive integers");
        }
        out.insert(static_cast<int>(item.get<long long>()));
    }
    return out;
}

template <typename Record, typename Decode>
std::vector<Record> read_jsonl(const std::filesystem::path& path, Decode&& decode) {
    const auto text = detail::read_file(path);
    const auto source = path.string();
    std::vector<Record> records;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) throw ParseError(source, line_no, "line is not a JSON object");
        records.push_back(decode(parsed, source, line_no));
    });
    return records;
}

template <typename Record, typename Key>
void require_unique(const std::vector<Record>& records, Key&& key, const std::filesystem::path& path) {
    std::vector<decltype(key(records.front()))> keys;
    keys.reserve(records.size());
    for (const auto& r : records) keys.push_back(key(r));
    std::sort(keys.begin(), keys.end());
    const auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end()) {
        std::ostringstream msg;
        msg << "duplicate identifier " << *dup;
        throw ParseError(path.string(), 0, msg.str());
    }
}

template <typename Record>
void write_jsonl(const std::vector<Record>& records, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    for (const auto& record : records) out << to_jsonl(record) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string to_jsonl(const AttackPatternRecord& record) {
    ordered_json j;
    j["capec_id"] = record.capec_id;
    j["name"] = record.name;
    j["description"] = record.description;
    j["cwes"] = record.related_weakness_ids;
    return dump(j);
}

std::string to_jsonl(const WeaknessRecord& record) {
    ordered_json j;
    j["cwe_id"] = record.cwe_id;
    j["name"] = record.name;
    j["cves"] = record.observed_cve_ids;
    return dump(j);
}

std::string to_jsonl(const VulnerabilityRecord& record) {
    ordered_json j;
    j["cve_id"] = record.cve_id;
    j["description"] = record.description;
    j["cwes"] = record.referenced_cwe_ids;
    return dump(j);
}

Snapshot load_snapshot(const std::filesystem::path& dir) {
    const auto patterns_path = dir / "patterns.jsonl";
    const auto weaknesses_path = dir / "weaknesses.jsonl";
    const auto vulns_path = dir / "vulns.jsonl";
    for (const auto& p : {patterns_path, weaknesses_path, vulns_path}) {
        if (!std::filesystem::exists(p)) throw Error("missing snapshot file " + p.string());
    }

    auto patterns = std::async(std::launch::async, [&] {
        return read_jsonl<AttackPatternRecord>(patterns_path, [](const json& j, const std::string& src, std::size_t line) {
            AttackPatternRecord r;
            r.capec_id = id_field(j, "capec_id", src, line);
            r.name = string_field(j, "name", src, line);
            r.description = string_field(j, "description", src, line);
            r.related_weakness_ids = int_set(j, "cwes", src, line);
            if (r.description.empty()) throw ParseError(src, line, "empty description");
            return r;
        });
    });
    auto weaknesses = std::async(std::launch::async, [&] {
        return read_jsonl<WeaknessRecord>(weaknesses_path, [](const json& j, const std::string& src, std::size_t line) {
            WeaknessRecord r;
            r.cwe_id = id_field(j, "cwe_id", src, line);
            r.name = string_field(j, "name", src, line);
            const json& cves = field(j, "cves", src, line);
            if (!cves.is_array()) throw ParseError(src, line, "field 'cves' must be an array");
            for (const json& c : cves) {
                if (!c.is_string() || !is_cve_id(c.get_ref<const std::string&>())) {
                    throw ParseError(src, line, "field 'cves' must hold CVE identifiers");
                }
                r.observed_cve_ids.insert(c.get<std::string>());
            }
            return r;
        });
    });
    auto vulns = read_jsonl<VulnerabilityRecord>(vulns_path, [](const json& j, const std::string& src, std::size_t line) {
        VulnerabilityRecord r;
        r.cve_id = string_field(j, "cve_id", src, line);
        if (!is_cve_id(r.cve_id)) throw ParseError(src, line, "malformed cve_id '" + r.cve_id + "'");
        r.description = string_field(j, "description", src, line);
        r.referenced_cwe_ids = int_set(j, "cwes", src, line);
        return r;
    });

    Snapshot snapshot{patterns.get(), weaknesses.get(), std::move(vulns)};
    require_unique(snapshot.patterns, [](const auto& r) { return r.capec_id; }, patterns_path);
    require_unique(snapshot.weaknesses, [](const auto& r) { return r.cwe_id; }, weaknesses_path);
    require_unique(snapshot.vulnerabilities, [](const auto& r) { return r.cve_id; }, vulns_path);
    return snapshot;
}

void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir) {
    write_jsonl(snapshot.patterns, dir / "patterns.jsonl");
    write_jsonl(snapshot.weaknesses, dir / "weaknesses.jsonl");
    write_jsonl(snapshot.vulnerabilities, dir / "vulns.jsonl");
}

Snapshot load_feeds(const std::filesystem::path& capec_xml, const std::filesystem::path& cwe_xml,
                    const std::filesystem::path& nvd_dir) {
    for (const auto& p : {capec_xml, cwe_xml, nvd_dir}) {
        if (!std::filesystem::exists(p)) throw Error("missing input " + p.string());
    }
    auto patterns = std::async(std::launch::async, [&] {
        return parse_capec(detail::read_file(capec_xml), capec_xml.string()).records;
    });
    auto weaknesses = std::async(std::launch::async, [&] {
        return parse_cwe(detail::read_file(cwe_xml), cwe_xml.string()).records;
    });

    std::vector<std::filesystem::path> feeds;
    for (const auto& entry : std::filesystem::directory_iterator(nvd_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") feeds.push_back(entry.path());
    }
    std::sort(feeds.begin(), feeds.end());
    std::vector<VulnerabilityRecord> vulns;
    std::set<std::string> seen;
    for (const auto& feed : feeds) {
        for (auto& record : parse_cve_feed(detail::read_file(feed), feed.string()).records) {
            // Yearly feeds do not overlap, but "modified"/"recent" feeds do; first occurrence wins.
            if (seen.insert(record.cve_id).second) vulns.push_back(std::move(record));
        }
    }
    return Snapshot{patterns.get(), weaknesses.get(), std::move(vulns)};
}

}  // namespace attackmap::corpus

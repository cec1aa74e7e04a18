#include <json.hpp>

#include <string>

#include "attackmap/corpus.hpp"
#include "attackmap/error.hpp"

namespace attackmap::corpus {

namespace {

using nlohmann::json;

[[noreturn]] void shape_error(std::string_view source, const std::string& path, const std::string& what) {
    throw ParseError(std::string(source) + ":" + path, 0, what);
}

const json* member(const json& node, const char* key) {
    if (!node.is_object()) return nullptr;
    const auto it = node.find(key);
    return it == node.end() ? nullptr : &*it;
}

const json& expect_array(const json& node, std::string_view source, const std::string& path) {
    if (!node.is_array()) shape_error(source, path, "expected an array");
    return node;
}

std::string english_description(const json& cve, std::string_view source, const std::string& path) {
    const json* desc = member(cve, "description");
    if (desc == nullptr) return {};
    const json* data = member(*desc, "description_data");
    if (data == nullptr) return {};
    const auto data_path = path + "/description/description_data";
    expect_array(*data, source, data_path);
    std::string fallback;
    for (std::size_t i = 0; i < data->size(); ++i) {
        const json& entry = (*data)[i];
        const json* value = member(entry, "value");
        if (value == nullptr) continue;
        if (!value->is_string()) shape_error(source, data_path + "/" + std::to_string(i) + "/value", "expected a string");
        const json* lang = member(entry, "lang");
        if (lang != nullptr && lang->is_string() && lang->get_ref<const std::string&>() == "en") {
            return value->get<std::string>();
        }
        if (fallback.empty()) fallback = value->get<std::string>();
    }
    return fallback;
}

void collect_problem_types(const json& cve, std::set<int>& out, std::string_view source, const std::string& path) {
    const json* problemtype = member(cve, "problemtype");
    if (problemtype == nullptr) return;
    const json* data = member(*problemtype, "problemtype_data");
    if (data == nullptr) return;
    const auto data_path = path + "/problemtype/problemtype_data";
    expect_array(*data, source, data_path);
    for (std::size_t i = 0; i < data->size(); ++i) {
        const json* descriptions = member((*data)[i], "description");
        if (descriptions == nullptr) continue;
        const auto desc_path = data_path + "/" + std::to_string(i) + "/description";
        expect_array(*descriptions, source, desc_path);
        for (std::size_t j = 0; j < descriptions->size(); ++j) {
            const json* value = member((*descriptions)[j], "value");
            if (value == nullptr) continue;
            if (!value->is_string()) shape_error(source, desc_path + "/" + std::to_string(j) + "/value", "expected a string");
            if (const int cwe = parse_cwe_ref(value->get_ref<const std::string&>()); cwe > 0) out.insert(cwe);
        }
    }
}

VulnerabilityRecord simplified_record(const json& line, bool& valid, std::string_view source, std::size_t line_no) {
    VulnerabilityRecord record;
    const json* id = member(line, "cve_id");
    valid = id != nullptr && id->is_string() && is_cve_id(id->get_ref<const std::string&>());
    if (!valid) return record;
    record.cve_id = id->get<std::string>();
    if (const json* desc = member(line, "description"); desc != nullptr && desc->is_string()) {
        record.description = desc->get<std::string>();
    }
    if (const json* cwes = member(line, "cwes"); cwes != nullptr) {
        if (!cwes->is_array()) throw ParseError(std::string(source), line_no, "'cwes' must be an array");
        for (const json& cwe : *cwes) {
            if (!cwe.is_number_integer() || cwe.get<long long>() <= 0) {
                throw ParseError(std::string(source), line_no, "'cwes' entries must be positive integers");
            }
            record.referenced_cwe_ids.insert(static_cast<int>(cwe.get<long long>()));
        }
    }
    return record;
}

ParseResult<VulnerabilityRecord> parse_simplified(std::string_view text, std::string_view source) {
    ParseResult<VulnerabilityRecord> result;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw ParseError(std::string(source), line_no, "line is not a JSON object");
        }
        bool valid = false;
        auto record = simplified_record(parsed, valid, source, line_no);
        if (valid) {
            result.records.push_back(std::move(record));
        } else {
            ++result.skipped_invalid;
        }
    }
    return result;
}

bool looks_simplified(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return true;
    auto end = text.find('\n', first);
    if (end == std::string_view::npos) end = text.size();
    const json head = json::parse(text.substr(first, end - first), nullptr, false);
    return !head.is_discarded() && head.is_object() && head.contains("cve_id");
}

}  // namespace

bool is_cve_id(std::string_view text) {
    if (text.size() < 13 || text.substr(0, 4) != "CVE-") return false;
    for (std::size_t i = 4; i < 8; ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    if (text[8] != '-') return false;
    for (std::size_t i = 9; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    return true;
}

int parse_cwe_ref(std::string_view text) {
    if (text.size() < 5 || text.substr(0, 4) != "CWE-" || text.size() > 13) return 0;
    int value = 0;
    for (std::size_t i = 4; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') return 0;
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

ParseResult<VulnerabilityRecord> parse_cve_feed(std::string_view text, std::string_view source) {
    if (looks_simplified(text)) return parse_simplified(text, source);

    json document;
    try {
        document = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(source), e.byte, e.what());
    }
    const json* items = member(document, "CVE_Items");
    if (items == nullptr) shape_error(source, "/CVE_Items", "missing NVD item list");
    expect_array(*items, source, "/CVE_Items");

    ParseResult<VulnerabilityRecord> result;
    result.records.reserve(items->size());
    for (std::size_t i = 0; i < items->size(); ++i) {
        const auto path = "/CVE_Items/" + std::to_string(i) + "/cve";
        const json* cve = member((*items)[i], "cve");
        const json* meta = cve == nullptr ? nullptr : member(*cve, "CVE_data_meta");
        const json* id = meta == nullptr ? nullptr : member(*meta, "ID");
        if (id == nullptr || !id->is_string() || !is_cve_id(id->get_ref<const std::string&>())) {
            ++result.skipped_invalid;
            continue;
        }
        VulnerabilityRecord record;
        record.cve_id = id->get<std::string>();
        record.description = english_description(*cve, source, path);
        collect_problem_types(*cve, record.referenced_cwe_ids, source, path);
        result.records.push_back(std::move(record));
    }
    return result;
}

}  // namespace attackmap::corpus

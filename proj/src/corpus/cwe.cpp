#include <string>
#include <vector>

#include "attackmap/corpus.hpp"
#include "xml_sax.hpp"

namespace attackmap::corpus {

ParseResult<WeaknessRecord> parse_cwe(std::string_view xml, std::string_view source) {
    using detail::local_name;

    ParseResult<WeaknessRecord> result;
    std::vector<std::string> stack;
    WeaknessRecord current;
    bool in_weakness = false;
    bool in_reference = false;
    std::string reference;

    detail::SaxHandler handler;
    handler.on_start = [&](std::string_view qname, const detail::Attributes& attrs) {
        const auto name = local_name(qname);
        if (stack.empty()) {
            if (name != "Weakness_Catalog") {
                throw UnsupportedVersionError(std::string(source) + ": root element <" + std::string(qname) +
                                              "> is not a CWE catalog");
            }
            const auto version = detail::find_attribute(attrs, "Version");
            const int major = detail::major_version(version);
            if (major != 3 && major != 4) {
                throw UnsupportedVersionError(std::string(source) + ": unsupported CWE schema version '" +
                                              std::string(version) + "' (expected 3.x or 4.x)");
            }
        }
        stack.emplace_back(name);
        const auto depth = stack.size();
        if (!in_weakness && depth == 3 && name == "Weakness" && stack[1] == "Weaknesses") {
            in_weakness = true;
            current = {};
            current.cwe_id = detail::parse_positive_int(detail::find_attribute(attrs, "ID"));
            current.name = detail::normalize_space(detail::find_attribute(attrs, "Name"));
        } else if (in_weakness && depth == 6 && name == "Reference" && stack[3] == "Observed_Examples") {
            in_reference = true;
            reference.clear();
        }
    };
    handler.on_end = [&](std::string_view) {
        const auto depth = stack.size();
        if (in_reference && depth == 6) {
            in_reference = false;
            auto id = detail::normalize_space(reference);
            if (is_cve_id(id)) current.observed_cve_ids.insert(std::move(id));
        } else if (in_weakness && depth == 3) {
            in_weakness = false;
            if (current.cwe_id == 0) {
                ++result.skipped_invalid;
            } else {
                result.records.push_back(std::move(current));
            }
        }
        stack.pop_back();
    };
    handler.on_text = [&](std::string_view text) {
        if (in_reference) reference.append(text);
    };

    detail::SaxParser parser(std::move(handler));
    parser.parse(xml, source);
    return result;
}

}  // namespace attackmap::corpus

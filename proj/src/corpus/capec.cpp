#include <string>
#include <vector>

#include "attackmap/corpus.hpp"
#include "xml_sax.hpp"

namespace attackmap::corpus {

ParseResult<AttackPatternRecord> parse_capec(std::string_view xml, std::string_view source) {
    using detail::local_name;

    ParseResult<AttackPatternRecord> result;
    std::vector<std::string> stack;

    AttackPatternRecord current;
    bool in_pattern = false;
    bool deprecated = false;
    bool invalid_id = false;
    std::size_t description_depth = 0;  // stack depth of the open <Description>, 0 if none
    std::string description;

    detail::SaxHandler handler;
    handler.on_start = [&](std::string_view qname, const detail::Attributes& attrs) {
        const auto name = local_name(qname);
        if (stack.empty()) {
            if (name != "Attack_Pattern_Catalog") {
                throw UnsupportedVersionError(std::string(source) + ": root element <" + std::string(qname) +
                                              "> is not a CAPEC catalog");
            }
            const auto version = detail::find_attribute(attrs, "Version");
            if (detail::major_version(version) != 3) {
                throw UnsupportedVersionError(std::string(source) + ": unsupported CAPEC schema version '" +
                                              std::string(version) + "' (expected 3.x)");
            }
        }
        stack.emplace_back(name);
        const auto depth = stack.size();
        if (!in_pattern && depth == 3 && name == "Attack_Pattern" && stack[1] == "Attack_Patterns") {
            in_pattern = true;
            current = {};
            description.clear();
            current.capec_id = detail::parse_positive_int(detail::find_attribute(attrs, "ID"));
            invalid_id = current.capec_id == 0;
            current.name = detail::normalize_space(detail::find_attribute(attrs, "Name"));
            deprecated = detail::find_attribute(attrs, "Status") == "Deprecated";
            return;
        }
        if (!in_pattern) return;
        if (description_depth != 0) {
            description.push_back(' ');  // nested xhtml markup separates words
        } else if (depth == 4 && name == "Description") {
            description_depth = depth;
        } else if (depth == 5 && name == "Related_Weakness" && stack[3] == "Related_Weaknesses") {
            if (const int cwe = detail::parse_positive_int(detail::find_attribute(attrs, "CWE_ID")); cwe > 0) {
                current.related_weakness_ids.insert(cwe);
            }
        }
    };
    handler.on_end = [&](std::string_view) {
        const auto depth = stack.size();
        if (in_pattern) {
            if (description_depth == depth) {
                description_depth = 0;
            } else if (description_depth != 0) {
                description.push_back(' ');
            } else if (depth == 3) {
                in_pattern = false;
                current.description = detail::normalize_space(description);
                if (invalid_id) {
                    ++result.skipped_invalid;
                } else if (deprecated) {
                    ++result.dropped_deprecated;
                } else if (current.description.empty()) {
                    ++result.dropped_empty;
                } else {
                    result.records.push_back(std::move(current));
                }
            }
        }
        stack.pop_back();
    };
    handler.on_text = [&](std::string_view text) {
        if (description_depth != 0) description.append(text);
    };

    detail::SaxParser parser(std::move(handler));
    parser.parse(xml, source);
    return result;
}

}  // namespace attackmap::corpus

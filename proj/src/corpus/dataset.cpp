#include <json.hpp>

#include <unordered_map>

#include "attackmap/corpus.hpp"
#include "../detail/io.hpp"

namespace attackmap::corpus {

std::string make_doc_id(int capec_id, std::string_view cve_id) {
    return "CAPEC-" + std::to_string(capec_id) + ":" + std::string(cve_id);
}

std::vector<LabeledDocument> derive_dataset(const LinkageGraph& graph,
                                            const std::vector<AttackPatternRecord>& patterns) {
    std::unordered_map<int, const AttackPatternRecord*> by_id;
    for (const auto& p : patterns) by_id.emplace(p.capec_id, &p);

    std::vector<LabeledDocument> docs;
    docs.reserve(graph.pattern_to_vulnerability.size());
    // pattern_to_vulnerability is sorted by (capec_id, cve_id) already.
    for (const auto& [capec, cve] : graph.pattern_to_vulnerability) {
        const auto it = by_id.find(capec);
        if (it == by_id.end()) continue;
        docs.push_back(LabeledDocument{make_doc_id(capec, cve), capec, it->second->description, cve});
    }
    return docs;
}

std::string to_jsonl(const LabeledDocument& doc) {
    nlohmann::ordered_json j;
    j["doc_id"] = doc.doc_id;
    j["capec_id"] = doc.capec_id;
    j["text"] = doc.text;
    j["label"] = doc.label;
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_dataset(const std::vector<LabeledDocument>& docs, const std::filesystem::path& file) {
    auto out = detail::open_output(file);
    for (const auto& doc : docs) out << to_jsonl(doc) << '\n';
    if (!out) throw Error("failed writing " + file.string());
}

std::vector<LabeledDocument> read_dataset(const std::filesystem::path& file) {
    const auto text = detail::read_file(file);
    const auto source = file.string();
    std::vector<LabeledDocument> docs;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(source, line_no, "line is not a JSON object");
        LabeledDocument doc;
        try {
            doc.doc_id = j.at("doc_id").get<std::string>();
            doc.capec_id = j.at("capec_id").get<int>();
            doc.text = j.at("text").get<std::string>();
            doc.label = j.at("label").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, line_no, e.what());
        }
        docs.push_back(std::move(doc));
    });
    return docs;
}

}  // namespace attackmap::corpus

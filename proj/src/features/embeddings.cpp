#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <unordered_map>

#include "../detail/io.hpp"
#include "attackmap/error.hpp"
#include "attackmap/features.hpp"

namespace attackmap::features {

FeatureMatrix load_embeddings(const std::filesystem::path& file, std::span<const std::string> expected_ids,
                              std::string* model_out) {
    const auto text = detail::read_file(file);
    const auto source = file.string();

    std::unordered_map<std::string, std::vector<double>> vectors;
    std::string model;
    std::size_t dimension = 0;
    bool first = true;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(source, line_no, "line is not a JSON object");
        const auto id_it = j.find("doc_id");
        const auto model_it = j.find("model");
        const auto vector_it = j.find("vector");
        if (id_it == j.end() || !id_it->is_string()) throw ParseError(source, line_no, "missing string 'doc_id'");
        if (model_it == j.end() || !model_it->is_string()) throw ParseError(source, line_no, "missing string 'model'");
        if (vector_it == j.end() || !vector_it->is_array()) throw ParseError(source, line_no, "missing array 'vector'");

        std::vector<double> values;
        values.reserve(vector_it->size());
        for (const auto& v : *vector_it) {
            if (!v.is_number()) throw ParseError(source, line_no, "non-numeric vector entry");
            values.push_back(v.get<double>());
            if (!std::isfinite(values.back())) throw ParseError(source, line_no, "non-finite vector entry");
        }
        const auto& line_model = model_it->get_ref<const std::string&>();
        if (first) {
            model = line_model;
            dimension = values.size();
            first = false;
        } else if (line_model != model) {
            throw ParseError(source, line_no, "model '" + line_model + "' differs from '" + model + "'");
        } else if (values.size() != dimension) {
            throw ParseError(source, line_no,
                             "vector length " + std::to_string(values.size()) + " differs from " + std::to_string(dimension));
        }
        const auto& id = id_it->get_ref<const std::string&>();
        if (!vectors.emplace(id, std::move(values)).second) {
            throw ParseError(source, line_no, "duplicate doc_id '" + id + "'");
        }
    });

    DenseMatrix m(expected_ids.size(), dimension);
    for (std::size_t r = 0; r < expected_ids.size(); ++r) {
        const auto it = vectors.find(expected_ids[r]);
        if (it == vectors.end()) throw Error(source + ": no embedding for doc_id '" + expected_ids[r] + "'");
        std::ranges::copy(it->second, m.row(r).begin());
    }
    if (model_out != nullptr) *model_out = model;
    return FeatureMatrix{std::move(m), std::vector<std::string>(expected_ids.begin(), expected_ids.end())};
}

void write_embeddings(const std::filesystem::path& file, const std::vector<EmbeddingRecord>& records) {
    auto out = detail::open_output(file);
    for (const auto& record : records) {
        nlohmann::ordered_json j;
        j["doc_id"] = record.doc_id;
        j["model"] = record.model;
        j["vector"] = record.vector;
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing " + file.string());
}

}  // namespace attackmap::features

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "../detail/io.hpp"
#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"

namespace attackmap::eval {

namespace {

constexpr std::string_view kResultsHeader = "method,classifier,n,fold,precision,recall,f1,auc";

std::string fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

double round6(double value) { return std::stod(fixed6(value)); }

std::string display_method(const std::string& name) {
    const auto m = parse_method(name);
    return m ? std::string(method_display_name(*m)) : name;
}

std::string display_classifier(const std::string& name) {
    const auto a = learn::parse_algorithm(name);
    return a ? std::string(learn::algorithm_display_name(*a)) : name;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

ReportTable aggregate(std::span<const Cell> cells) {
    ReportTable table;
    std::vector<std::array<std::vector<double>, 4>> values;
    for (const Cell& cell : cells) {
        auto it = std::ranges::find_if(table.rows, [&](const ReportRow& row) {
            return row.method == cell.method && row.classifier == cell.classifier;
        });
        if (it == table.rows.end()) {
            table.rows.push_back({cell.method, cell.classifier, {}});
            values.emplace_back();
            it = table.rows.end() - 1;
        }
        auto& bucket = values[static_cast<std::size_t>(it - table.rows.begin())];
        for (std::size_t m = 0; m < 4; ++m) bucket[m].push_back(metric_value(cell.metrics, m));
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t m = 0; m < 4; ++m) {
            const auto& v = values[r][m];
            Summary& s = table.rows[r].metrics[m];
            s.count = v.size();
            s.min = *std::ranges::min_element(v);
            s.max = *std::ranges::max_element(v);
            double sum = 0.0;
            for (const double x : v) sum += x;
            s.mean = sum / static_cast<double>(v.size());
        }
    return table;
}

long percent(double value) { return static_cast<long>(std::floor(value * 100.0 + 0.5 + 1e-9)); }

std::string render_summary(const Summary& summary) {
    return std::to_string(percent(summary.min)) + "-" + std::to_string(percent(summary.max)) + "(" +
           std::to_string(percent(summary.mean)) + ")";
}

std::string render_table_markdown(const ReportTable& table) {
    std::ostringstream out;
    out << "| Method | Classifier |";
    for (const auto name : kMetricDisplayNames) out << ' ' << name << " |";
    out << "\n|---|---|---|---|---|---|\n";
    for (const auto& row : table.rows) {
        out << "| " << display_method(row.method) << " | " << display_classifier(row.classifier) << " |";
        for (const auto& s : row.metrics) out << ' ' << render_summary(s) << " |";
        out << '\n';
    }
    return out.str();
}

std::string render_table_csv(const ReportTable& table) {
    std::ostringstream out;
    out << "Method,Classifier";
    for (const auto name : kMetricDisplayNames) out << ',' << name;
    out << '\n';
    for (const auto& row : table.rows) {
        out << display_method(row.method) << ',' << display_classifier(row.classifier);
        for (const auto& s : row.metrics) out << ',' << render_summary(s);
        out << '\n';
    }
    return out.str();
}

std::vector<Cell> quantize(std::span<const Cell> cells) {
    std::vector<Cell> out(cells.begin(), cells.end());
    for (Cell& c : out) {
        c.metrics.precision = round6(c.metrics.precision);
        c.metrics.recall = round6(c.metrics.recall);
        c.metrics.f1 = round6(c.metrics.f1);
        c.metrics.auc = round6(c.metrics.auc);
    }
    return out;
}

std::string results_csv(std::span<const Cell> cells) {
    std::string out(kResultsHeader);
    out += '\n';
    for (const Cell& c : cells) {
        out += c.method + ',' + c.classifier + ',' + std::to_string(c.n) + ',' + std::to_string(c.fold);
        for (std::size_t m = 0; m < 4; ++m) out += ',' + fixed6(metric_value(c.metrics, m));
        out += '\n';
    }
    return out;
}

std::vector<Cell> parse_results_csv(std::string_view text, std::string_view source) {
    std::vector<Cell> cells;
    bool seen_header = false;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (!seen_header) {
            if (line != kResultsHeader)
                throw ParseError(std::string(source), line_no,
                                 "expected header '" + std::string(kResultsHeader) + "'");
            seen_header = true;
            return;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 8)
            throw ParseError(std::string(source), line_no,
                             "expected 8 fields, found " + std::to_string(fields.size()));
        Cell cell;
        cell.method = std::string(fields[0]);
        cell.classifier = std::string(fields[1]);
        if (cell.method.empty() || cell.classifier.empty())
            throw ParseError(std::string(source), line_no, "empty method or classifier");
        if (!parse_number(fields[2], cell.n) || !parse_number(fields[3], cell.fold))
            throw ParseError(std::string(source), line_no, "n and fold must be non-negative integers");
        std::array<double, 4> v{};
        for (std::size_t m = 0; m < 4; ++m)
            if (!parse_number(fields[4 + m], v[m]) || !std::isfinite(v[m]))
                throw ParseError(std::string(source), line_no,
                                 "bad " + std::string(kMetricNames[m]) + " value '" + std::string(fields[4 + m]) + "'");
        cell.metrics = {v[0], v[1], v[2], v[3]};
        cells.push_back(std::move(cell));
    });
    if (cells.empty()) throw Error(std::string(source) + ": no cells");
    return cells;
}

std::vector<Cell> read_results_csv(const std::filesystem::path& file) {
    return parse_results_csv(detail::read_file(file), file.string());
}

std::string distribution_csv(std::span<const Cell> cells, std::size_t metric) {
    std::vector<std::string> methods;
    std::vector<std::vector<double>> columns;
    for (const Cell& c : cells) {
        auto it = std::ranges::find(methods, c.method);
        if (it == methods.end()) {
            methods.push_back(c.method);
            columns.emplace_back();
            it = methods.end() - 1;
        }
        columns[static_cast<std::size_t>(it - methods.begin())].push_back(metric_value(c.metrics, metric));
    }
    std::string out;
    for (std::size_t i = 0; i < methods.size(); ++i) out += (i ? "," : "") + display_method(methods[i]);
    out += '\n';
    std::size_t height = 0;
    for (const auto& col : columns) height = std::max(height, col.size());
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            if (r < columns[i].size()) out += fixed6(columns[i][r]);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> emit_report(std::span<const Cell> cells, const ReportTable& table,
                                               const std::filesystem::path& dir,
                                               std::span<const TableFormat> formats, bool write_results) {
    std::vector<std::filesystem::path> written;
    const auto put = [&](const std::filesystem::path& name, const std::string& body) {
        auto out = detail::open_output(dir / name);
        out << body;
        if (!out) throw Error("cannot write " + (dir / name).string());
        written.push_back(dir / name);
    };
    if (write_results) put("results.csv", results_csv(cells));
    for (const TableFormat f : formats) {
        if (f == TableFormat::csv) put("table.csv", render_table_csv(table));
        else put("table.md", render_table_markdown(table));
    }
    for (std::size_t m = 0; m < 4; ++m)
        put("distribution_" + std::string(kMetricNames[m]) + ".csv", distribution_csv(cells, m));
    return written;
}

}  // namespace attackmap::eval

#include "attackmap/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include "../detail/io.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"
#include "attackmap/features.hpp"
#include "attackmap/kernels.hpp"
#include "attackmap/textprep.hpp"

namespace attackmap::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A path named on the command line or in the config file that does not exist.
class MissingInput : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string snapshot;
    std::string capec;
    std::string cwe;
    std::string nvd;
    std::string dataset;
    std::string results;
    std::vector<std::string> methods{"tfidf", "lsi"};
    std::vector<std::string> classifiers{"all"};
    std::string n_values = "2-6";
    std::uint64_t seed = 42;
    std::size_t jobs = 0;
    std::string out = "out";
    std::map<std::string, std::string> embeddings;  // method -> file
    std::vector<std::string> formats{"csv", "md"};
    std::string method = "tfidf";  // featurize
    std::size_t topics = features::kDefaultLsiTopics;
    bool dry_run = false;
    bool verbose = false;
};

void require_exists(const std::string& path, std::string_view what) {
    if (path.empty()) throw UsageError(std::string(what) + " not given");
    if (!fs::exists(path)) throw MissingInput(std::string(what) + " not found: " + path);
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const std::size_t comma = std::min(item.find(',', start), item.size());
            if (comma > start) out.push_back(item.substr(start, comma - start));
            start = comma + 1;
        }
    }
    return out;
}

std::vector<eval::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<eval::Method> out;
    for (const auto& name : split_list(names)) {
        if (name == "all") {
            out.assign(std::begin(eval::kAllMethods), std::end(eval::kAllMethods));
            continue;
        }
        const auto m = eval::parse_method(name);
        if (!m) throw UsageError("unknown method '" + name + "' (expected tfidf, lsi, minilm, roberta, bert or all)");
        if (std::ranges::find(out, *m) == out.end()) out.push_back(*m);
    }
    if (out.empty()) throw UsageError("no methods selected");
    return out;
}

std::vector<learn::Algorithm> parse_classifiers(const std::vector<std::string>& names) {
    std::vector<learn::Algorithm> out;
    for (const auto& name : split_list(names)) {
        if (name == "all") {
            out.assign(std::begin(learn::kAllAlgorithms), std::end(learn::kAllAlgorithms));
            continue;
        }
        const auto a = learn::parse_algorithm(name);
        if (!a) throw UsageError("unknown classifier '" + name + "' (expected knn, nb, svm, rf, dt, nn or all)");
        if (std::ranges::find(out, *a) == out.end()) out.push_back(*a);
    }
    if (out.empty()) throw UsageError("no classifiers selected");
    return out;
}

// "2-6", "2,4,6" or a mix.
std::vector<std::size_t> parse_n_values(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& part : split_list({text})) {
        const auto dash = part.find('-');
        try {
            std::size_t lo = 0, hi = 0;
            if (dash == std::string::npos) {
                lo = hi = std::stoul(part);
            } else {
                lo = std::stoul(part.substr(0, dash));
                hi = std::stoul(part.substr(dash + 1));
            }
            if (lo > hi) throw UsageError("");
            for (std::size_t n = lo; n <= hi; ++n)
                if (std::ranges::find(out, n) == out.end()) out.push_back(n);
        } catch (const std::exception&) {
            throw UsageError("bad --n value '" + part + "'");
        }
    }
    for (const std::size_t n : out)
        if (n < 2) throw UsageError("n must be at least 2");
    if (out.empty()) throw UsageError("no n values selected");
    return out;
}

std::vector<eval::TableFormat> parse_formats(const std::vector<std::string>& names) {
    std::vector<eval::TableFormat> out;
    for (const auto& name : split_list(names)) {
        eval::TableFormat f;
        if (name == "csv") f = eval::TableFormat::csv;
        else if (name == "md" || name == "markdown") f = eval::TableFormat::markdown;
        else throw UsageError("unknown format '" + name + "' (expected csv or md)");
        if (std::ranges::find(out, f) == out.end()) out.push_back(f);
    }
    return out;
}

// Fills fields from the JSON config wherever the matching flag was not given.
void merge_config(RunConfig& cfg, const fs::path& file, const CLI::App& app) {
    json j;
    try {
        j = json::parse(detail::read_file(file));
    } catch (const json::exception& e) {
        throw Error(file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error(file.string() + ": expected a JSON object");
    static const std::set<std::string> known{"snapshot", "capec", "cwe", "nvd", "dataset", "results",
                                             "methods", "classifiers", "n_values", "seed", "jobs", "out",
                                             "embeddings", "formats", "topics"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw UsageError(file.string() + ": unknown key '" + key + "'");

    const auto given = [&](const char* flag) {
        const CLI::Option* opt = nullptr;
        for (const CLI::App* a = &app; a && !opt; a = a->get_parent()) {
            try {
                opt = a->get_option(flag);
            } catch (const CLI::OptionNotFound&) {
            }
        }
        return opt && opt->count() > 0;
    };
    const auto str = [&](const char* key, const char* flag, std::string& field) {
        if (j.contains(key) && !given(flag)) field = j.at(key).get<std::string>();
    };
    const auto list = [&](const char* key, const char* flag, std::vector<std::string>& field) {
        if (j.contains(key) && !given(flag)) field = j.at(key).get<std::vector<std::string>>();
    };
    try {
        // Relative paths in the file resolve against the file's directory.
        const fs::path base = file.parent_path();
        const auto path = [&](const char* key, const char* flag, std::string& field) {
            if (j.contains(key) && !given(flag)) field = (base / j.at(key).get<std::string>()).lexically_normal().string();
        };
        path("snapshot", "--snapshot", cfg.snapshot);
        path("capec", "--capec", cfg.capec);
        path("cwe", "--cwe", cfg.cwe);
        path("nvd", "--nvd", cfg.nvd);
        path("dataset", "--dataset", cfg.dataset);
        path("results", "--results", cfg.results);
        path("out", "--out", cfg.out);
        list("methods", "--methods", cfg.methods);
        list("classifiers", "--classifiers", cfg.classifiers);
        list("formats", "--format", cfg.formats);
        if (j.contains("n_values") && !given("--n")) {
            const auto& n = j.at("n_values");
            if (n.is_string()) {
                cfg.n_values = n.get<std::string>();
            } else {
                cfg.n_values.clear();
                for (const auto& v : n) cfg.n_values += (cfg.n_values.empty() ? "" : ",") + std::to_string(v.get<std::size_t>());
            }
        }
        if (j.contains("seed") && !given("--seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("jobs") && !given("--jobs")) cfg.jobs = j.at("jobs").get<std::size_t>();
        if (j.contains("topics") && !given("--topics")) cfg.topics = j.at("topics").get<std::size_t>();
        if (j.contains("embeddings") && !given("--embedding"))
            for (const auto& [method, p] : j.at("embeddings").items())
                cfg.embeddings[method] = (base / p.get<std::string>()).lexically_normal().string();
        str("method", "--method", cfg.method);
    } catch (const json::exception& e) {
        throw UsageError(file.string() + ": " + e.what());
    }
}

corpus::Snapshot load_inputs(const RunConfig& cfg) {
    if (!cfg.snapshot.empty()) {
        require_exists(cfg.snapshot, "snapshot directory");
        for (const char* name : {"patterns.jsonl", "weaknesses.jsonl", "vulns.jsonl"})
            require_exists((fs::path(cfg.snapshot) / name).string(), "snapshot file");
        return corpus::load_snapshot(cfg.snapshot);
    }
    if (cfg.capec.empty() && cfg.cwe.empty() && cfg.nvd.empty())
        throw UsageError("give --snapshot, or --capec, --cwe and --nvd");
    require_exists(cfg.capec, "CAPEC feed");
    require_exists(cfg.cwe, "CWE feed");
    require_exists(cfg.nvd, "NVD feed directory");
    return corpus::load_feeds(cfg.capec, cfg.cwe, cfg.nvd);
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto snapshot = load_inputs(cfg);
    const auto graph = corpus::build_linkage(snapshot.patterns, snapshot.weaknesses, snapshot.vulnerabilities);
    const auto dataset = corpus::derive_dataset(graph, snapshot.patterns);
    out << corpus::render_stats(corpus::linkage_stats(graph, snapshot));
    err << "dataset: " << dataset.size() << " instances, " << graph.linked_vulnerabilities().size() << " labels\n";
    if (const auto& d = graph.dangling; d.pattern_to_weakness + d.weakness_to_vulnerability + d.vulnerability_to_weakness)
        err << "dangling references ignored: pattern->cwe " << d.pattern_to_weakness << ", cwe->cve "
            << d.weakness_to_vulnerability << ", cve->cwe " << d.vulnerability_to_weakness << '\n';
    if (cfg.dry_run) return kExitOk;
    const fs::path file = fs::path(cfg.out) / "dataset.jsonl";
    corpus::write_dataset(dataset, file);
    err << "wrote " << file.string() << '\n';
    return kExitOk;
}

std::vector<corpus::LabeledDocument> load_dataset(const RunConfig& cfg) {
    const std::string file = cfg.dataset.empty() ? (fs::path(cfg.out) / "dataset.jsonl").string() : cfg.dataset;
    require_exists(file, "dataset");
    return corpus::read_dataset(file);
}

int cmd_preprocess(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    const auto dataset = load_dataset(cfg);
    const textprep::Preprocessor prep;
    const fs::path file = fs::path(cfg.out) / "tokens.jsonl";
    auto stream = detail::open_output(file);
    for (const auto& doc : dataset) {
        json line = json::object();
        line["doc_id"] = doc.doc_id;
        line["tokens"] = prep(doc.text);
        stream << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    err << "wrote " << file.string() << '\n';
    return kExitOk;
}

// Whole-dataset features for inspection; the benchmark refits per fold.
int cmd_featurize(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    const auto dataset = load_dataset(cfg);
    const auto method = eval::parse_method(cfg.method);
    if (!method || eval::is_transformer(*method))
        throw UsageError("featurize supports tfidf and lsi; transformer embeddings come from the embedding files");
    const textprep::Preprocessor prep;
    std::vector<textprep::TokenList> tokens;
    std::vector<std::string> ids;
    for (const auto& doc : dataset) {
        tokens.push_back(prep(doc.text));
        ids.push_back(doc.doc_id);
    }
    const auto model = features::fit_tfidf(tokens);
    auto matrix = features::transform_tfidf(tokens, model, ids);
    const fs::path dir(cfg.out);
    {
        auto vocab = detail::open_output(dir / "vocabulary.txt");
        for (const auto& term : model.vocabulary.terms) vocab << term << '\n';
    }
    if (*method == eval::Method::tfidf) {
        auto stream = detail::open_output(dir / "tfidf.jsonl");
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            const auto& row = matrix.sparse().row(r);
            stream << json{{"doc_id", ids[r]}, {"indices", row.indices}, {"values", row.values}}.dump() << '\n';
        }
        err << "wrote " << (dir / "tfidf.jsonl").string() << " (" << model.vocabulary.size() << " terms)\n";
        return kExitOk;
    }
    const auto lsi = features::fit_lsi(matrix, features::default_lsi_rank(matrix.rows(), matrix.cols(), cfg.topics));
    const auto projected = features::project_lsi(matrix, lsi);
    std::vector<features::EmbeddingRecord> records;
    for (std::size_t r = 0; r < projected.rows(); ++r) {
        const auto row = projected.dense().row(r);
        records.push_back({ids[r], "lsi", {row.begin(), row.end()}});
    }
    features::write_embeddings(dir / "lsi.jsonl", records);
    err << "wrote " << (dir / "lsi.jsonl").string() << " (k=" << lsi.k << ")\n";
    return kExitOk;
}

void print_table(const eval::ReportTable& table, std::ostream& out) { out << eval::render_table_markdown(table); }

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    eval::BenchmarkConfig bench;
    bench.methods = parse_methods(cfg.methods);
    bench.classifiers = parse_classifiers(cfg.classifiers);
    bench.n_values = parse_n_values(cfg.n_values);
    bench.seed = cfg.seed;
    bench.jobs = cfg.jobs;
    bench.lsi_topics = cfg.topics;
    const auto formats = parse_formats(cfg.formats);
    for (const auto& [name, file] : cfg.embeddings) {
        const auto m = eval::parse_method(name);
        if (!m || !eval::is_transformer(*m)) throw UsageError("--embedding: '" + name + "' is not a transformer method");
        if (std::ranges::find(bench.methods, *m) == bench.methods.end()) continue;
        require_exists(file, std::string(eval::method_name(*m)) + " embedding file");
        bench.embedding_files[*m] = file;
    }
    if (const auto missing = eval::missing_embeddings(bench); !missing.empty()) {
        std::string names;
        for (const auto m : missing) names += (names.empty() ? "" : ", ") + std::string(eval::method_name(m));
        throw UsageError("missing embedding files for transformer methods: " + names +
                         " (pass --embedding METHOD=FILE)");
    }
    const auto dataset = load_dataset(cfg);

    const std::size_t jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    err << "bench: seed=" << cfg.seed << " jobs=" << jobs << " cells="
        << bench.methods.size() * bench.classifiers.size() * bench.n_values.size() * eval::kFolds
        << " simd=" << kernels::isa_name(kernels::active_isa()) << '\n';
    std::size_t done = 0;
    if (cfg.verbose)
        bench.on_cell = [&](const eval::Cell& c) {
            err << "  [" << ++done << "] " << c.method << '/' << c.classifier << " n=" << c.n << " fold=" << c.fold
                << " f1=" << c.metrics.f1 << '\n';
        };
    const auto start = std::chrono::steady_clock::now();
    const auto cells = eval::quantize(eval::run_benchmark(dataset, bench));
    const auto table = eval::aggregate(cells);
    eval::emit_report(cells, table, cfg.out, formats);
    err << "bench: " << cells.size() << " cells in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s, wrote "
        << cfg.out << '\n';
    print_table(table, out);
    return kExitOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::string file = cfg.results.empty() ? (fs::path(cfg.out) / "results.csv").string() : cfg.results;
    require_exists(file, "results file");
    const auto formats = parse_formats(cfg.formats);
    const auto cells = eval::read_results_csv(file);
    const auto table = eval::aggregate(cells);
    eval::emit_report(cells, table, cfg.out, formats, /*write_results=*/false);
    err << "report: " << cells.size() << " cells, " << table.rows.size() << " rows\n";
    if (formats.size() == 1 && formats.front() == eval::TableFormat::csv)
        out << eval::render_table_csv(table);
    else
        print_table(table, out);
    return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attack pattern to CVE classification benchmark"};
    app.name("attackmap");
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    std::string config_file;
    app.add_option("--seed", cfg.seed, "master seed (default 42)");
    app.add_option("--jobs", cfg.jobs, "concurrent grid cells (default: available parallelism)");
    app.add_option("--out", cfg.out, "output directory (default out)");
    app.add_option("--config", config_file, "JSON run configuration; flags take precedence");
    app.add_flag("-v,--verbose", cfg.verbose, "per-cell progress on stderr");

    auto* ingest = app.add_subcommand("ingest", "parse feeds, build the linkage graph, write dataset.jsonl");
    ingest->add_option("--snapshot", cfg.snapshot, "bundled snapshot directory");
    ingest->add_option("--capec", cfg.capec, "CAPEC XML catalog");
    ingest->add_option("--cwe", cfg.cwe, "CWE XML catalog");
    ingest->add_option("--nvd", cfg.nvd, "directory of NVD JSON 1.1 feeds");
    ingest->add_flag("--dry-run", cfg.dry_run, "validate inputs and print stats, write nothing");

    auto* preprocess = app.add_subcommand("preprocess", "write tokens.jsonl for a dataset");
    preprocess->add_option("--dataset", cfg.dataset, "dataset.jsonl (default <out>/dataset.jsonl)");

    auto* featurize = app.add_subcommand("featurize", "fit TF-IDF or LSI on a whole dataset and write the features");
    featurize->add_option("--dataset", cfg.dataset, "dataset.jsonl (default <out>/dataset.jsonl)");
    featurize->add_option("--method", cfg.method, "tfidf or lsi");
    featurize->add_option("--topics", cfg.topics, "LSI topics (default 100)");

    std::vector<std::string> embedding_flags;
    auto* bench = app.add_subcommand("bench", "run the classification grid");
    bench->add_option("--dataset", cfg.dataset, "dataset.jsonl (default <out>/dataset.jsonl)");
    bench->add_option("--methods", cfg.methods, "tfidf,lsi,minilm,roberta,bert or all (default tfidf,lsi)");
    bench->add_option("--classifiers", cfg.classifiers, "knn,nb,svm,rf,dt,nn or all (default all)");
    bench->add_option("--n", cfg.n_values, "label counts, e.g. 2-6 or 2,4");
    bench->add_option("--embedding", embedding_flags, "METHOD=FILE for a transformer method");
    bench->add_option("--format", cfg.formats, "table formats: csv, md (default both)");
    bench->add_option("--topics", cfg.topics, "LSI topics (default 100)");

    auto* report = app.add_subcommand("report", "re-render the table and distributions from results.csv");
    report->add_option("--results", cfg.results, "results.csv (default <out>/results.csv)");
    report->add_option("--format", cfg.formats, "table formats: csv, md (default both)");

    std::vector<std::string> argv_storage{"attackmap"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (const auto& item : embedding_flags) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
                throw UsageError("--embedding expects METHOD=FILE, got '" + item + "'");
            cfg.embeddings[item.substr(0, eq)] = item.substr(eq + 1);
        }
        const CLI::App* sub = app.get_subcommands().front();
        if (!config_file.empty()) {
            require_exists(config_file, "config file");
            merge_config(cfg, config_file, *sub);
        }
        if (sub == ingest) return cmd_ingest(cfg, out, err);
        if (sub == preprocess) return cmd_preprocess(cfg, out, err);
        if (sub == featurize) return cmd_featurize(cfg, out, err);
        if (sub == bench) return cmd_bench(cfg, out, err);
        return cmd_report(cfg, out, err);
    } catch (const MissingInput& e) {
        err << "attackmap: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "attackmap: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "attackmap: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace attackmap::cli

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "attackmap/corpus.hpp"
#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"
#include "attackmap/rng.hpp"
#include "attackmap/textprep.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace attackmap;
using namespace attackmap::eval;

namespace {

std::vector<corpus::LabeledDocument> docs_with_counts(const std::map<std::string, int>& counts) {
    std::vector<corpus::LabeledDocument> docs;
    int id = 1;
    for (const auto& [label, n] : counts)
        for (int i = 0; i < n; ++i, ++id) docs.push_back({"CAPEC-" + std::to_string(id) + ":" + label, id, "text", label});
    return docs;
}

std::vector<corpus::LabeledDocument> fixture_dataset() {
    return corpus::read_dataset(testing::kFixtures / "dataset.jsonl");
}

BenchmarkConfig small_config() {
    BenchmarkConfig c;
    c.methods = {Method::tfidf};
    c.classifiers = {learn::Algorithm::gaussian_nb};
    c.n_values = {2};
    return c;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("method names") {
    for (const Method m : kAllMethods) CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("TF-IDF") == Method::tfidf);
    CHECK(parse_method("MiniLM") == Method::minilm);
    CHECK_FALSE(parse_method("word2vec"));
    CHECK(is_transformer(Method::bert));
    CHECK_FALSE(is_transformer(Method::lsi));
}

TEST_CASE("label ranking") {
    const auto docs = docs_with_counts({{"X", 5}, {"Y", 3}, {"Z", 5}});
    CHECK(rank_labels_by_frequency(docs) == std::vector<std::string>{"X", "Z", "Y"});
    CHECK(rank_labels_by_frequency(docs_with_counts({{"only", 2}})) == std::vector<std::string>{"only"});

    const auto top2 = select_top_n(docs, 2);
    CHECK(top2.size() == 10);
    for (const auto& d : top2) CHECK(d.label != "Y");
    CHECK(select_top_n(docs, 3) == docs);
    CHECK_THROWS_AS(select_top_n(docs, 4), InvalidArgument);
}

TEST_CASE("bundled snapshot: top labels by brute-force count") {
    const auto s = corpus::load_snapshot(testing::kSnapshot);
    const auto docs = corpus::derive_dataset(corpus::build_linkage(s.patterns, s.weaknesses, s.vulnerabilities), s.patterns);
    std::map<std::string, std::size_t> count;
    for (const auto& d : docs) ++count[d.label];
    std::vector<std::size_t> sorted;
    for (const auto& [l, c] : count) sorted.push_back(c);
    std::ranges::sort(sorted, std::greater<>());

    const auto ranked = rank_labels_by_frequency(docs);
    REQUIRE(ranked.size() == 685);
    for (std::size_t i = 0; i < 6; ++i) CHECK(count[ranked[i]] == sorted[i]);
    const auto top2 = select_top_n(docs, 2);
    CHECK(top2.size() == sorted[0] + sorted[1]);
    for (const auto& d : top2) CHECK((d.label == ranked[0] || d.label == ranked[1]));
}

TEST_CASE("fold plan on 100 uniform samples") {
    std::vector<int> labels(100, 0);
    const auto plan = make_folds(labels, 1);
    REQUIRE(plan.folds.size() == 5);
    std::set<std::size_t> tested;
    for (const auto& f : plan.folds) {
        CHECK(f.train.size() == 80);
        CHECK(f.validation.size() == 10);
        CHECK(f.test.size() == 10);
        for (const auto i : f.test) CHECK(tested.insert(i).second);
    }
    CHECK(make_folds(labels, 1).folds[3].test == plan.folds[3].test);
}

TEST_CASE("fold plan stratifies two classes") {
    std::vector<int> labels(60, 0);
    labels.resize(100, 1);
    for (const auto& f : make_folds(labels, 8).folds) {
        int zeros = 0;
        for (const auto i : f.test) zeros += labels[i] == 0;
        CHECK(std::abs(zeros - 6) <= 1);
        CHECK(std::abs(static_cast<int>(f.test.size()) - zeros - 4) <= 1);
    }
}

TEST_CASE("fold plan invariants on random draws") {
    Rng rng(77);
    for (int draw = 0; draw < 100; ++draw) {
        std::vector<int> labels;
        const std::size_t classes = 1 + rng.below(6);
        for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t k = 5 + rng.below(60); k > 0; --k) labels.push_back(static_cast<int>(c));
        rng.shuffle(std::span<int>(labels));
        const std::uint64_t seed = rng.next();
        const auto plan = make_folds(labels, seed);
        const double n = static_cast<double>(labels.size());
        std::set<std::size_t> tested;
        CAPTURE(draw);
        for (const auto& f : plan.folds) {
            std::vector<std::size_t> all = f.train;
            all.insert(all.end(), f.validation.begin(), f.validation.end());
            all.insert(all.end(), f.test.begin(), f.test.end());
            std::ranges::sort(all);
            CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
            CHECK(all.size() == labels.size());
            CHECK(std::abs(static_cast<double>(f.train.size()) - 0.8 * n) <= 1.0);
            CHECK(std::abs(static_cast<double>(f.validation.size()) - 0.1 * n) <= 1.0);
            CHECK(std::abs(static_cast<double>(f.test.size()) - 0.1 * n) <= 1.0);
            for (const auto i : f.test) CHECK(tested.insert(i).second);
            for (std::size_t c = 0; c < classes; ++c) {
                const double total = static_cast<double>(std::ranges::count(labels, static_cast<int>(c)));
                const auto in = [&](const std::vector<std::size_t>& rows) {
                    return static_cast<double>(std::ranges::count_if(rows, [&](auto i) { return labels[i] == static_cast<int>(c); }));
                };
                CHECK(std::abs(in(f.test) - 0.1 * total) <= 1.0);
                CHECK(std::abs(in(f.validation) - 0.1 * total) <= 1.0);
                CHECK(std::abs(in(f.train) - 0.8 * total) <= 1.0);
            }
        }
        const auto again = make_folds(labels, seed);
        for (std::size_t i = 0; i < kFolds; ++i) {
            CHECK(again.folds[i].train == plan.folds[i].train);
            CHECK(again.folds[i].test == plan.folds[i].test);
        }
    }
    const std::vector<int> small{0, 0, 0, 0, 0, 1, 1, 1, 1};
    CHECK_THROWS_WITH_AS(make_folds(small, 1), doctest::Contains("class 1"), InvalidArgument);
}

TEST_CASE("metrics on hand examples") {
    DenseMatrix scores(4, 2);
    const double s1[] = {0.1, 0.4, 0.35, 0.8};
    for (std::size_t i = 0; i < 4; ++i) {
        scores(i, 1) = s1[i];
        scores(i, 0) = 1 - s1[i];
    }
    const auto m = compute_metrics(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}, scores);
    CHECK(std::abs(m.precision - 5.0 / 6.0) < 1e-9);
    CHECK(std::abs(m.recall - 0.75) < 1e-9);
    CHECK(std::abs(m.f1 - (2.0 / 3.0 + 0.8) / 2.0) < 1e-9);
    CHECK(m.auc == 0.75);

    DenseMatrix perfect(4, 2);
    DenseMatrix inverted(4, 2);
    const std::vector<int> y{0, 1, 0, 1};
    for (std::size_t i = 0; i < 4; ++i) {
        perfect(i, static_cast<std::size_t>(y[i])) = 1.0;
        inverted(i, static_cast<std::size_t>(1 - y[i])) = 1.0;
    }
    CHECK(compute_metrics(y, y, perfect) == MetricsCell{1, 1, 1, 1});
    CHECK(compute_metrics(y, y, inverted).auc == 0.0);

    const std::vector<int> same{1, 1, 1};
    CHECK(compute_metrics(same, same, DenseMatrix(3, 2)).auc == 0.5);
    CHECK_THROWS_AS(compute_metrics(y, same, perfect), InvalidArgument);
}

TEST_CASE("metrics match the brute-force oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(20), classes = 2 + rng.below(3);
        std::vector<int> y_true(n), y_pred(n);
        DenseMatrix scores(n, classes);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.below(classes));
            y_pred[i] = static_cast<int>(rng.below(classes));
            for (std::size_t c = 0; c < classes; ++c) scores(i, c) = static_cast<double>(rng.below(5)) / 4.0;  // many ties
        }
        const auto got = compute_metrics(y_true, y_pred, scores);
        const auto want = oracle::metrics(y_true, y_pred, scores);
        CAPTURE(trial);
        CHECK(std::abs(got.precision - want.precision) <= 1e-12);
        CHECK(std::abs(got.recall - want.recall) <= 1e-12);
        CHECK(std::abs(got.f1 - want.f1) <= 1e-12);
        CHECK(std::abs(got.auc - want.auc) <= 1e-12);
    }
}

TEST_CASE("A-B(C) rendering") {
    CHECK(percent(0.5) == 50);
    CHECK(percent(0.775) == 78);
    CHECK(percent(0.125) == 13);
    CHECK(percent(0.0) == 0);
    CHECK(percent(1.0) == 100);
    CHECK(render_summary({0.67, 0.94, 0.77, 3}) == "67-94(77)");

    std::vector<Cell> cells;
    for (const double auc : {0.67, 0.94, 0.70}) cells.push_back({"tfidf", "knn", 2, cells.size(), {0.5, 0.5, 0.5, auc}});
    cells.push_back({"tfidf", "nb", 2, 0, {0.5, 0.5, 0.5, 0.5}});
    const auto table = aggregate(cells);
    REQUIRE(table.rows.size() == 2);
    CHECK(render_summary(table.rows[0].metrics[3]) == "67-94(77)");
    CHECK(render_summary(table.rows[1].metrics[0]) == "50-50(50)");
    for (const auto& row : table.rows)
        for (const auto& s : row.metrics) CHECK((s.min <= s.mean && s.mean <= s.max));

    const auto md = render_table_markdown(table);
    CHECK(md.find("| TF-IDF | KNN | 50-50(50) | 50-50(50) | 50-50(50) | 67-94(77) |") != std::string::npos);
    const auto csv = render_table_csv(table);
    CHECK(csv.find("TF-IDF,NB,50-50(50),50-50(50),50-50(50),50-50(50)") != std::string::npos);
}

TEST_CASE("results CSV round trip and errors") {
    std::vector<Cell> cells{{"tfidf", "knn", 2, 0, {0.1234567, 0.5, 1.0, 0.0}}, {"lsi", "nn", 6, 4, {0.25, 0.75, 1.0 / 3.0, 0.9}}};
    const auto text = results_csv(cells);
    CHECK(text.starts_with("method,classifier,n,fold,precision,recall,f1,auc\ntfidf,knn,2,0,0.123457,0.500000,1.000000,0.000000\n"));
    CHECK(parse_results_csv(text) == quantize(cells));
    CHECK(results_csv(parse_results_csv(text)) == text);

    CHECK_THROWS_WITH(parse_results_csv("method,classifier,n,fold,precision,recall,f1,auc\n"), doctest::Contains("no cells"));
    try {
        parse_results_csv(text + "lsi,nn,6,4,0.1,0.2\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.location() == 4);
    }
    CHECK_THROWS_AS(parse_results_csv("a,b\n" + text), ParseError);
    CHECK_THROWS_AS(parse_results_csv(text + "lsi,nn,x,4,0.1,0.2,0.3,0.4\n"), ParseError);
}

TEST_CASE("distribution export groups cells by method") {
    std::vector<Cell> cells{{"tfidf", "knn", 2, 0, {0, 0, 0.1, 0}}, {"lsi", "knn", 2, 0, {0, 0, 0.2, 0}},
                            {"tfidf", "nb", 2, 0, {0, 0, 0.3, 0}}};
    CHECK(distribution_csv(cells, 2) == "TF-IDF,LSI\n0.100000,0.200000\n0.300000,\n");
}

TEST_CASE("emit_report writes every artifact") {
    testing::TempDir dir;
    const std::vector<Cell> cells{{"tfidf", "knn", 2, 0, {0.5, 0.5, 0.5, 0.5}}};
    const std::vector<TableFormat> formats{TableFormat::csv, TableFormat::markdown};
    const auto written = emit_report(cells, aggregate(cells), dir / "nested", formats);
    CHECK(written.size() == 7);
    for (const auto& p : written) CHECK(std::filesystem::exists(p));
    CHECK(read_results_csv(dir / "nested" / "results.csv") == cells);
}

TEST_CASE("grid cardinality and order") {
    const auto docs = fixture_dataset();
    auto config = small_config();
    CHECK(run_benchmark(docs, config).size() == 5);

    config.classifiers = {learn::Algorithm::gaussian_nb, learn::Algorithm::knn};
    config.methods = {Method::tfidf, Method::lsi};
    config.n_values = {2, 3};
    const auto cells = run_benchmark(docs, config);
    REQUIRE(cells.size() == 2 * 2 * 2 * 5);
    CHECK(cells[0].method == "tfidf");
    CHECK(cells[0].classifier == "nb");
    CHECK(cells[4].fold == 4);
    CHECK(cells[5].n == 3);
    CHECK(cells[10].classifier == "knn");
    CHECK(cells[20].method == "lsi");
}

TEST_CASE("serial and concurrent grids agree bit for bit") {
    const auto docs = fixture_dataset();
    BenchmarkConfig config;
    config.methods = {Method::tfidf, Method::lsi};
    config.classifiers = {learn::Algorithm::knn, learn::Algorithm::random_forest, learn::Algorithm::mlp};
    config.n_values = {2, 4};
    config.jobs = 1;
    const auto serial = run_benchmark(docs, config);
    config.jobs = 3;
    CHECK(run_benchmark(docs, config) == serial);
    CHECK(run_benchmark(docs, config) == serial);
    config.seed = 43;
    CHECK(run_benchmark(docs, config) != serial);
}

TEST_CASE("transformer methods run from the fixture embedding files") {
    const auto docs = fixture_dataset();
    BenchmarkConfig config;
    config.methods = {Method::minilm, Method::roberta, Method::bert};
    config.classifiers = {learn::Algorithm::gaussian_nb, learn::Algorithm::svm_rbf};
    config.n_values = {2, 4};
    for (const auto m : config.methods)
        config.embedding_files[m] = testing::kFixtures / ("embeddings_" + std::string(method_name(m)) + ".jsonl");
    const auto cells = run_benchmark(docs, config);
    CHECK(cells.size() == 3 * 2 * 2 * 5);
    double mean_f1 = 0;
    for (const auto& c : cells) mean_f1 += c.metrics.f1 / static_cast<double>(cells.size());
    CHECK(mean_f1 > 0.8);  // fixture vectors sit around per-label centroids
}

TEST_CASE("missing embeddings fail before training") {
    auto config = small_config();
    config.methods = {Method::tfidf, Method::bert, Method::minilm};
    CHECK(missing_embeddings(config) == std::vector<Method>{Method::bert, Method::minilm});
    CHECK_THROWS_WITH_AS(run_benchmark(fixture_dataset(), config), doctest::Contains("bert, minilm"), InvalidArgument);

    config.methods = {Method::roberta};
    config.embedding_files[Method::roberta] = "/nonexistent/embeddings.jsonl";
    CHECK_THROWS_AS(run_benchmark(fixture_dataset(), config), Error);
}

TEST_CASE("a failing cell names itself") {
    auto config = small_config();
    config.n_values = {9};
    CHECK_THROWS_WITH(run_benchmark(fixture_dataset(), config), doctest::Contains("n = 9"));
    config.n_values = {2};
    config.smote_neighbors = 0;
    CHECK_THROWS_WITH(run_benchmark(fixture_dataset(), config), doctest::Contains("tfidf n=2 fold=0"));
}

TEST_CASE("features never see test rows") {
    const auto docs = fixture_dataset();
    const textprep::Preprocessor prep;
    std::vector<textprep::TokenList> tokens;
    for (const auto& d : docs) tokens.push_back(prep(d.text));
    std::vector<int> labels;
    const auto ranking = rank_labels_by_frequency(docs);
    for (const auto& d : docs)
        labels.push_back(static_cast<int>(std::ranges::find(ranking, d.label) - ranking.begin()));
    const auto plan = make_folds(labels, 5);

    for (const Method method : {Method::tfidf, Method::lsi}) {
        for (const auto& fold : plan.folds) {
            const auto base = featurize_fold(method, tokens, nullptr, fold, 100);
            auto altered = tokens;
            for (const auto i : fold.test) altered[i] = {"zzzunseen", "qqqunseen"};
            for (const auto i : fold.validation) altered[i] = {"vvvunseen"};
            const auto other = featurize_fold(method, altered, nullptr, fold, 100);
            CHECK(other.vocabulary_size == base.vocabulary_size);
            if (method == Method::tfidf) {
                CHECK(other.train.sparse() == base.train.sparse());
                for (std::size_t r = 0; r < other.test.rows(); ++r) CHECK(other.test.sparse().row(r).nnz() == 0);
            } else {
                CHECK(other.train.dense() == base.train.dense());
            }
        }
    }
}

}

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "attackmap/error.hpp"
#include "attackmap/eval.hpp"
#include "attackmap/features.hpp"
#include "attackmap/rng.hpp"

namespace attackmap::eval {

namespace {

std::vector<textprep::TokenList> gather(std::span<const textprep::TokenList> tokens,
                                        std::span<const std::size_t> rows) {
    std::vector<textprep::TokenList> out;
    out.reserve(rows.size());
    for (const std::size_t r : rows) out.push_back(tokens[r]);
    return out;
}

std::vector<int> gather(std::span<const int> labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const std::size_t r : rows) out.push_back(labels[r]);
    return out;
}

// Score columns of a model indexed by label, so labels missing from training
// still get a (constant) column.
DenseMatrix scores_by_label(const learn::ClassifierModel& model, const FeatureMatrix& x, std::size_t n_labels) {
    const DenseMatrix raw = model.predict_scores(x);
    const auto& labels = model.class_labels();
    DenseMatrix out(raw.rows(), n_labels, 0.0);
    for (std::size_t r = 0; r < raw.rows(); ++r)
        for (std::size_t c = 0; c < labels.size(); ++c) out(r, static_cast<std::size_t>(labels[c])) = raw(r, c);
    return out;
}

struct Unit {
    std::size_t method_index;
    std::size_t n_index;
    std::size_t fold;
};

struct Scenario {
    std::vector<std::size_t> rows;  // dataset rows
    std::vector<int> labels;        // frequency rank of each row's label
    FoldPlan plan;
};

}  // namespace

std::uint64_t cell_seed(std::uint64_t master, Method method, learn::Algorithm classifier, std::size_t n,
                        std::size_t fold) {
    std::uint64_t seed = mix_seed(master, method_name(method));
    seed = mix_seed(seed, learn::algorithm_name(classifier));
    seed = mix_seed(seed, static_cast<std::uint64_t>(n));
    return mix_seed(seed, static_cast<std::uint64_t>(fold));
}

std::vector<Method> missing_embeddings(const BenchmarkConfig& config) {
    std::vector<Method> missing;
    for (const Method m : config.methods)
        if (is_transformer(m) && !config.embedding_files.contains(m)) missing.push_back(m);
    return missing;
}

FoldFeatures featurize_fold(Method method, std::span<const textprep::TokenList> tokens,
                            const FeatureMatrix* embeddings, const Fold& fold, std::size_t lsi_topics) {
    FoldFeatures out;
    if (is_transformer(method)) {
        if (!embeddings) throw InvalidArgument(std::string("no embeddings supplied for ") +
                                               std::string(method_name(method)));
        out.train = embeddings->select(fold.train);
        out.validation = embeddings->select(fold.validation);
        out.test = embeddings->select(fold.test);
        return out;
    }

    const auto train_docs = gather(tokens, fold.train);
    const auto model = features::fit_tfidf(train_docs);
    out.vocabulary_size = model.vocabulary.size();
    out.train = features::transform_tfidf(train_docs, model);
    out.validation = features::transform_tfidf(gather(tokens, fold.validation), model);
    out.test = features::transform_tfidf(gather(tokens, fold.test), model);
    if (method == Method::lsi) {
        const std::size_t k = features::default_lsi_rank(out.train.rows(), out.train.cols(), lsi_topics);
        const auto lsi = features::fit_lsi(out.train, k);
        out.train = features::project_lsi(out.train, lsi);
        out.validation = features::project_lsi(out.validation, lsi);
        out.test = features::project_lsi(out.test, lsi);
    }
    return out;
}

std::vector<Cell> run_benchmark(std::span<const corpus::LabeledDocument> dataset, const BenchmarkConfig& config) {
    if (const auto missing = missing_embeddings(config); !missing.empty()) {
        std::string names;
        for (const Method m : missing) names += (names.empty() ? "" : ", ") + std::string(method_name(m));
        throw InvalidArgument("no embedding file given for: " + names);
    }
    if (config.methods.empty() || config.classifiers.empty() || config.n_values.empty())
        throw InvalidArgument("benchmark grid is empty");

    std::vector<std::string> ids;
    ids.reserve(dataset.size());
    for (const auto& doc : dataset) ids.push_back(doc.doc_id);

    // Embedding files are read up front so a bad file fails before any training.
    std::map<Method, FeatureMatrix> embeddings;
    for (const Method m : config.methods)
        if (is_transformer(m) && !embeddings.contains(m))
            embeddings.emplace(m, features::load_embeddings(config.embedding_files.at(m), ids));

    const textprep::Preprocessor prep;
    std::vector<textprep::TokenList> tokens;
    tokens.reserve(dataset.size());
    for (const auto& doc : dataset) tokens.push_back(prep(doc.text));

    const auto ranking = rank_labels_by_frequency(dataset);
    std::vector<Scenario> scenarios;
    for (const std::size_t n : config.n_values) {
        if (n < 2 || n > ranking.size())
            throw InvalidArgument("n = " + std::to_string(n) + " is outside [2, " + std::to_string(ranking.size()) +
                                  "]");
        Scenario s;
        for (std::size_t r = 0; r < dataset.size(); ++r) {
            const auto it = std::find(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(n),
                                      dataset[r].label);
            if (it == ranking.begin() + static_cast<std::ptrdiff_t>(n)) continue;
            s.rows.push_back(r);
            s.labels.push_back(static_cast<int>(it - ranking.begin()));
        }
        s.plan = make_folds(s.labels, mix_seed(mix_seed(config.seed, "folds"), static_cast<std::uint64_t>(n)));
        scenarios.push_back(std::move(s));
    }

    std::vector<Unit> units;
    for (std::size_t m = 0; m < config.methods.size(); ++m)
        for (std::size_t ni = 0; ni < config.n_values.size(); ++ni)
            for (std::size_t f = 0; f < kFolds; ++f) units.push_back({m, ni, f});

    const std::size_t n_classifiers = config.classifiers.size();
    std::vector<Cell> by_unit(units.size() * n_classifiers);
    std::mutex progress_mutex;

    const auto run_unit = [&](const Unit& unit) {
        const Method method = config.methods[unit.method_index];
        const std::size_t n = config.n_values[unit.n_index];
        const Scenario& scenario = scenarios[unit.n_index];
        const Fold& local = scenario.plan.folds[unit.fold];

        // Map fold positions (scenario-relative) to dataset rows.
        Fold global;
        for (const std::size_t i : local.train) global.train.push_back(scenario.rows[i]);
        for (const std::size_t i : local.validation) global.validation.push_back(scenario.rows[i]);
        for (const std::size_t i : local.test) global.test.push_back(scenario.rows[i]);
        const FeatureMatrix* emb = is_transformer(method) ? &embeddings.at(method) : nullptr;
        const FoldFeatures feats = featurize_fold(method, tokens, emb, global, config.lsi_topics);

        const auto y_train = gather(scenario.labels, local.train);
        const auto y_val = gather(scenario.labels, local.validation);
        const auto y_test = gather(scenario.labels, local.test);

        for (std::size_t c = 0; c < n_classifiers; ++c) {
            const learn::Algorithm algorithm = config.classifiers[c];
            const std::uint64_t seed = cell_seed(config.seed, method, algorithm, n, unit.fold);
            const auto balanced = learn::smote(feats.train, y_train, config.smote_neighbors, mix_seed(seed, "smote"));
            learn::TrainConfig tc = config.base;
            tc.algorithm = algorithm;
            tc.seed = seed;
            const auto model = learn::fit(balanced.x, balanced.y, tc, {&feats.validation, y_val});
            const auto predicted = model->predict(feats.test);
            const auto scores = scores_by_label(*model, feats.test, n);

            Cell cell{std::string(method_name(method)), std::string(learn::algorithm_name(algorithm)), n, unit.fold,
                      compute_metrics(y_test, predicted, scores)};
            if (config.on_cell) {
                const std::lock_guard lock(progress_mutex);
                config.on_cell(cell);
            }
            by_unit[(&unit - units.data()) * n_classifiers + c] = std::move(cell);
        }
    };

    std::size_t jobs = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, units.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= units.size()) return;
            const Unit& unit = units[i];
            try {
                run_unit(unit);
            } catch (const std::exception& e) {
                const std::lock_guard lock(error_mutex);
                if (!failed.exchange(true))
                    first_error = std::make_exception_ptr(
                        Error(std::string(method_name(config.methods[unit.method_index])) +
                              " n=" + std::to_string(config.n_values[unit.n_index]) +
                              " fold=" + std::to_string(unit.fold) + ": " + e.what()));
            }
        }
    };

    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);

    // Reorder to method, classifier, n, fold.
    std::vector<Cell> cells;
    cells.reserve(by_unit.size());
    for (std::size_t m = 0; m < config.methods.size(); ++m)
        for (std::size_t c = 0; c < n_classifiers; ++c)
            for (std::size_t ni = 0; ni < config.n_values.size(); ++ni)
                for (std::size_t f = 0; f < kFolds; ++f) {
                    const std::size_t unit = (m * config.n_values.size() + ni) * kFolds + f;
                    cells.push_back(by_unit[unit * n_classifiers + c]);
                }
    return cells;
}

}  // namespace attackmap::eval

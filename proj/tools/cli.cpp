#include "cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "umrahguard/corpus.hpp"
#include "umrahguard/errors.hpp"
#include "umrahguard/evaluation.hpp"
#include "umrahguard/model.hpp"
#include "umrahguard/service.hpp"
#include "umrahguard/textprep.hpp"
#include "umrahguard/tuning.hpp"

#ifndef UMRAHGUARD_VERSION
#define UMRAHGUARD_VERSION "0.0.0"
#endif

namespace umrahguard::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- configuration ---------------------------------------------------------

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> folds;
    std::string out;
    std::string data, registry, model, input, type, data_dir, metric;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::size_t> n_official, n_unofficial;
    std::size_t top_k = 5;
    bool augment = false;
};

/// Effective settings: defaults, overlaid by the --config file, overlaid by flags.
struct RunConfig {
    fs::path dataset, registry, data_dir, synonyms;
    fs::path out = "out";
    std::uint64_t seed = 42;
    std::size_t folds = 10;
    ScoreMetric metric = ScoreMetric::Accuracy;
    FeatureConfig features;
    std::optional<ModelType> model_type;
    ParamSet model_params = ParamSet::object();
    std::optional<ojson> grid;
    std::vector<FeatureConfig> ablation;
    bool augment = false;
    double augment_rate = 0.2;
    std::size_t augment_copies = 1;

    ojson to_json() const {
        ojson j;
        j["dataset"] = dataset.generic_string();
        j["registry"] = registry.generic_string();
        j["data_dir"] = data_dir.generic_string();
        j["out"] = out.generic_string();
        j["seed"] = seed;
        j["folds"] = folds;
        j["metric"] = metric_name(metric);
        j["features"] = {{"text", features.use_text},
                         {"permissions", features.use_permissions},
                         {"metadata", features.use_metadata}};
        j["model"] = {{"type", model_type ? ojson(model_type_name(*model_type)) : ojson(nullptr)},
                      {"params", model_params}};
        j["grid"] = grid ? *grid : ojson(nullptr);
        j["augmentation"] = {{"enabled", augment},
                             {"rate", augment_rate},
                             {"copies", augment_copies},
                             {"synonyms", synonyms.generic_string()}};
        return j;
    }
};

FeatureConfig features_from(const ojson& j) {
    FeatureConfig f;
    f.use_text = j.value("text", true);
    f.use_permissions = j.value("permissions", true);
    f.use_metadata = j.value("metadata", true);
    f.validate();
    return f;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path.string());
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config file must hold a JSON object");

    static const std::set<std::string> known{"dataset", "registry", "data_dir", "out",      "seed",
                                             "folds",   "metric",   "features", "model",    "grid",
                                             "ablation", "augmentation"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) throw ValidationError("config: unknown key '" + k + "'");
    }

    const fs::path base = path.parent_path();
    RunConfig c;
    try {
        c.dataset = resolve(base, j.value("dataset", std::string{}));
        c.registry = resolve(base, j.value("registry", std::string{}));
        c.data_dir = resolve(base, j.value("data_dir", std::string{}));
        if (j.contains("out")) c.out = resolve(base, j["out"].get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.folds = j.value("folds", c.folds);
        if (j.contains("metric")) c.metric = parse_metric(j["metric"].get<std::string>());
        if (j.contains("features")) c.features = features_from(j["features"]);
        if (j.contains("model")) {
            const auto& m = j["model"];
            if (m.contains("type")) c.model_type = parse_model_type(m["type"].get<std::string>());
            if (m.contains("params")) c.model_params = m["params"];
        }
        if (j.contains("grid")) c.grid = j["grid"];
        if (j.contains("ablation")) {
            for (const auto& f : j["ablation"]) c.ablation.push_back(features_from(f));
        }
        if (j.contains("augmentation")) {
            const auto& a = j["augmentation"];
            c.augment = a.value("enabled", false);
            c.augment_rate = a.value("rate", c.augment_rate);
            c.augment_copies = a.value("copies", c.augment_copies);
            c.synonyms = resolve(base, a.value("synonyms", std::string{}));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: " + std::string(e.what()));
    }
    return c;
}

RunConfig effective_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (f.folds) c.folds = *f.folds;
    if (!f.out.empty()) c.out = f.out;
    if (!f.data.empty()) c.dataset = f.data;
    if (!f.registry.empty()) c.registry = f.registry;
    if (!f.data_dir.empty()) c.data_dir = f.data_dir;
    if (!f.type.empty()) c.model_type = parse_model_type(f.type);
    if (!f.metric.empty()) c.metric = parse_metric(f.metric);
    if (f.augment) c.augment = true;
    if (c.data_dir.empty()) c.data_dir = default_data_dir();
    if (c.augment && c.synonyms.empty()) c.synonyms = c.data_dir / "sinonim-id.json";

    if (c.folds < 2) throw ValidationError("--folds must be at least 2");
    for (const auto* p : {&c.dataset, &c.registry, &c.synonyms}) {
        if (!p->empty() && !fs::exists(*p)) throw ValidationError("path does not exist: " + p->string());
    }
    if (!fs::is_directory(c.data_dir)) throw ValidationError("data directory does not exist: " + c.data_dir.string());
    return c;
}

// --- run context -----------------------------------------------------------

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::string command;
    std::vector<std::string> args;
    RunConfig cfg;
    Flags flags;
    std::vector<fs::path> inputs;
    std::vector<std::string> outputs;

    void note_input(const fs::path& p) {
        if (!p.empty()) inputs.push_back(p);
    }

    fs::path output_path(const fs::path& target) const {
        for (const auto& in : inputs) {
            if (fs::exists(target) && fs::exists(in) && fs::equivalent(target, in)) {
                throw ValidationError("refusing to overwrite input file " + in.string());
            }
        }
        return target;
    }

    void write(const fs::path& target, const std::string& content) {
        const auto path = output_path(target);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + path.string());
        f << content;
        if (!f) throw ValidationError("write failed: " + path.string());
        outputs.push_back(path.generic_string());
    }

    void write_out(const std::string& name, const std::string& content) { write(cfg.out / name, content); }

    void write_manifest(const fs::path& dir, ojson extra = ojson::object()) {
        ojson m;
        m["tool"] = "umrahguard";
        m["tool_version"] = UMRAHGUARD_VERSION;
        m["model_format"] = TrainedModel::kFormatVersion;
        m["versions"] = {{"compiler", __VERSION__},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        m["command"] = command;
        m["arguments"] = args;
        m["seed"] = cfg.seed;
        m["config"] = cfg.to_json();
        ojson ins = ojson::array();
        for (const auto& p : inputs) ins.push_back(p.generic_string());
        m["inputs"] = std::move(ins);
        m["outputs"] = outputs;
        for (auto& [k, v] : extra.items()) m[k] = v;
        fs::create_directories(dir);
        std::ofstream f(dir / "run-manifest.json", std::ios::binary);
        f << m.dump(2) << '\n';
    }
};

std::string require(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
    return value;
}

struct LoadedCorpus {
    std::vector<AppRecord> records;
    std::vector<TokenDoc> tokens;
    std::vector<std::string> watchlist;
    TextResources resources;

    Corpus view() const { return {records, tokens, watchlist, &resources}; }
};

std::vector<AppRecord> load_labeled(Context& ctx, const fs::path& path) {
    ctx.note_input(path);
    auto records = load_dataset(path);
    const auto cleaned = clean_dataset(records);
    if (cleaned.size() != records.size()) {
        ctx.err << "note: dropped " << (records.size() - cleaned.size()) << " duplicate or blank records\n";
    }
    records = cleaned;
    if (!ctx.cfg.registry.empty()) {
        ctx.note_input(ctx.cfg.registry);
        const auto registry = load_registry(ctx.cfg.registry);
        for (auto& r : records) {
            if (!r.label) r.label = apply_labeling_criteria(r, registry).label;
        }
    }
    return records;
}

std::vector<std::string> watchlist_for(const RunConfig& cfg) {
    if (cfg.registry.empty()) return default_watchlist();
    auto w = load_registry(cfg.registry).high_risk_permissions;
    return w.empty() ? default_watchlist() : w;
}

LoadedCorpus load_corpus(Context& ctx) {
    if (ctx.cfg.dataset.empty()) throw UsageError("missing required option --data (or \"dataset\" in --config)");
    LoadedCorpus c;
    c.records = load_labeled(ctx, ctx.cfg.dataset);
    c.resources = TextResources::load(ctx.cfg.data_dir);
    c.tokens.reserve(c.records.size());
    for (const auto& r : c.records) c.tokens.push_back(preprocess_text(r.description, c.resources));
    c.watchlist = watchlist_for(ctx.cfg);
    return c;
}

std::optional<Augmentation> augmentation_for(const RunConfig& cfg) {
    if (!cfg.augment) return std::nullopt;
    Augmentation a;
    a.synonyms = SynonymMap::load(cfg.synonyms);
    a.rate = cfg.augment_rate;
    a.copies = cfg.augment_copies;
    a.seed = cfg.seed;
    return a;
}

ModelSpec spec_for(const RunConfig& cfg, ModelType type) {
    auto spec = ModelSpec::reference(type, cfg.seed);
    if (cfg.model_type == type) spec = spec.with_params(cfg.model_params);
    spec.features = cfg.features;
    spec.validate();
    return spec;
}

ojson default_grid(ModelType type) {
    switch (type) {
        case ModelType::Svm:
            return ojson::parse(R"({"kernel": ["linear", "rbf", "poly"], "C": [0.1, 1, 10, 100],
                                    "gamma": ["scale", "auto", 0.1, 0.01]})");
        case ModelType::RandomForest:
            return ojson::parse(R"({"n_estimators": [50, 100, 200], "max_depth": [null, 10, 20, 30],
                                    "criterion": ["gini", "entropy"]})");
        case ModelType::NaiveBayes: return ojson::parse(R"({"alpha": [0.1, 0.5, 1.0]})");
    }
    return ojson::object();
}

// --- subcommands -----------------------------------------------------------

int cmd_gen_data(Context& ctx) {
    auto gen = GeneratorConfig::reference(ctx.cfg.seed);
    if (ctx.flags.n_official) gen.n_official = *ctx.flags.n_official;
    if (ctx.flags.n_unofficial) gen.n_unofficial = *ctx.flags.n_unofficial;
    gen.validate();
    const fs::path target = ctx.flags.out.empty() ? ctx.cfg.out / "dataset.jsonl" : fs::path(ctx.flags.out);
    const auto records = generate_synthetic(gen);

    std::string body;
    for (const auto& r : records) body += record_to_json_line(r) + "\n";
    ctx.write(target, body);
    const auto registry_path = target.parent_path() / (target.stem().string() + ".registry.json");
    save_registry(synthetic_registry(gen), ctx.output_path(registry_path));
    ctx.outputs.push_back(registry_path.generic_string());

    ctx.out << "wrote " << records.size() << " records (" << gen.n_official << " official, " << gen.n_unofficial
            << " unofficial) to " << target.string() << "\n";
    ctx.write_manifest(target.parent_path().empty() ? fs::path(".") : target.parent_path(),
                       {{"generator", {{"n_official", gen.n_official},
                                       {"n_unofficial", gen.n_unofficial},
                                       {"p_highrisk_official", gen.p_highrisk_official},
                                       {"p_highrisk_unofficial", gen.p_highrisk_unofficial},
                                       {"noise_rate", gen.noise_rate}}}});
    return kExitOk;
}

int cmd_train(Context& ctx) {
    const auto corpus = load_corpus(ctx);
    const auto spec = spec_for(ctx.cfg, ctx.cfg.model_type.value_or(ModelType::Svm));
    const auto aug = augmentation_for(ctx.cfg);
    std::vector<std::size_t> all(corpus.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto set = build_training_set(corpus.view(), all, aug ? &*aug : nullptr, 0);
    const auto model = train_model(spec, set.records, set.tokens, corpus.watchlist);
    ctx.write_out("model.json", serialize_model(model));
    ctx.out << "trained " << spec.describe() << " on " << set.records.size() << " records ("
            << spec.features.label() << ", " << model.pipeline.width() << " features)\n";
    ctx.write_manifest(ctx.cfg.out);
    return kExitOk;
}

int cmd_evaluate(Context& ctx) {
    std::vector<MetricsRow> rows;
    ojson extra = ojson::object();

    if (!ctx.flags.model.empty()) {
        // Held-out evaluation of a saved model.
        const auto input = require(ctx.flags.input, "--in");
        ctx.note_input(ctx.flags.model);
        const auto model = load_model(ctx.flags.model);
        const auto records = load_labeled(ctx, input);
        const auto resources = TextResources::load(ctx.cfg.data_dir);
        std::vector<Label> predicted;
        for (const auto& r : records) {
            predicted.push_back(model.predict(r, preprocess_text(r.description, resources)).label);
        }
        const auto cm = confusion_from_predictions(labels_of(records), predicted);
        rows.push_back({std::string(model_type_name(model.spec.type)), compute_metrics(cm)});
        std::ostringstream cm_csv;
        write_confusion_csv(cm_csv, cm);
        ctx.write_out("confusion.csv", cm_csv.str());
        ctx.out << format_confusion_table(cm) << "\n";
        extra["mode"] = "held-out";
    } else {
        // Cross-validated evaluation; metrics come from the pooled out-of-fold predictions.
        const auto corpus = load_corpus(ctx);
        const auto plan = stratified_k_fold(labels_of(corpus.records), ctx.cfg.folds, ctx.cfg.seed);
        const auto aug = augmentation_for(ctx.cfg);
        CvOptions options;
        options.metric = ctx.cfg.metric;
        options.augmentation = aug ? &*aug : nullptr;

        std::vector<ModelType> types{ModelType::NaiveBayes, ModelType::RandomForest, ModelType::Svm};
        if (ctx.cfg.model_type) types = {*ctx.cfg.model_type};
        std::ostringstream folds_csv, cm_csv;
        folds_csv << "model,fold,score\n";
        cm_csv << "model,tp,fn,fp,tn\n";
        for (auto type : types) {
            const auto spec = spec_for(ctx.cfg, type);
            const auto cv = cross_validate(spec, corpus.view(), plan, options);
            const auto cm = confusion_from_predictions(labels_of(corpus.records), cv.predictions);
            const std::string name(model_type_name(type));
            rows.push_back({name, compute_metrics(cm)});
            for (std::size_t f = 0; f < cv.fold_scores.size(); ++f) {
                folds_csv << name << ',' << f << ',' << format_fixed(cv.fold_scores[f]) << '\n';
            }
            cm_csv << name << ',' << cm.tp << ',' << cm.fn << ',' << cm.fp << ',' << cm.tn << '\n';
            ctx.out << name << ": mean " << metric_name(ctx.cfg.metric) << " " << format_fixed(cv.mean) << " (std "
                    << format_fixed(cv.std) << ")\n"
                    << format_confusion_table(cm) << "\n";
        }
        ctx.write_out("folds.csv", folds_csv.str());
        ctx.write_out("confusion.csv", cm_csv.str());
        extra["mode"] = "cross-validation";
    }

    std::ostringstream csv;
    write_metrics_csv(csv, rows);
    ctx.write_out("metrics.csv", csv.str());
    const auto table = format_metrics_table(rows);
    ctx.write_out("metrics.txt", table);
    ctx.out << table;
    ctx.write_manifest(ctx.cfg.out, extra);
    return kExitOk;
}

int cmd_grid_search(Context& ctx) {
    const auto corpus = load_corpus(ctx);
    const auto type = ctx.cfg.model_type.value_or(ModelType::Svm);
    auto base = ModelSpec::reference(type, ctx.cfg.seed);
    base.features = ctx.cfg.features;
    const auto grid = ParamGrid::from_json(ctx.cfg.grid ? *ctx.cfg.grid : default_grid(type));
    const auto plan = stratified_k_fold(labels_of(corpus.records), ctx.cfg.folds, ctx.cfg.seed);
    const auto aug = augmentation_for(ctx.cfg);
    CvOptions options;
    options.metric = ctx.cfg.metric;
    options.augmentation = aug ? &*aug : nullptr;

    ctx.out << "evaluating " << grid.size() << " " << model_type_name(type) << " candidates with " << plan.k
            << "-fold CV\n";
    const auto result = grid_search(base, grid, corpus.view(), plan, options);

    std::ostringstream csv;
    csv << "candidate,params,mean,std\n";
    for (std::size_t c = 0; c < result.candidates.size(); ++c) {
        std::string params = result.candidates[c].params.dump();
        std::string quoted = "\"";
        for (char ch : params) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        csv << c << ',' << quoted << "\"," << format_fixed(result.candidates[c].mean) << ','
            << format_fixed(result.candidates[c].std) << '\n';
    }
    ctx.write_out("grid.csv", csv.str());
    ojson best{{"model", model_type_name(type)},
               {"params", result.best_params},
               {"score", result.best_score},
               {"metric", metric_name(ctx.cfg.metric)}};
    ctx.write_out("best-params.json", best.dump(2) + "\n");
    ctx.write_out("model.json", serialize_model(result.final_model));

    ctx.out << "best params: " << result.best_params.dump() << "\n"
            << "best mean " << metric_name(ctx.cfg.metric) << ": " << format_fixed(result.best_score) << "\n";
    ctx.write_manifest(ctx.cfg.out, {{"candidates_evaluated", result.candidates.size()}});
    return kExitOk;
}

int cmd_ablate(Context& ctx) {
    const auto corpus = load_corpus(ctx);
    const auto spec = spec_for(ctx.cfg, ctx.cfg.model_type.value_or(ModelType::Svm));
    const auto configs = ctx.cfg.ablation.empty() ? default_ablation_configs() : ctx.cfg.ablation;
    const auto plan = stratified_k_fold(labels_of(corpus.records), ctx.cfg.folds, ctx.cfg.seed);
    const auto aug = augmentation_for(ctx.cfg);
    CvOptions options;
    options.metric = ctx.cfg.metric;
    options.augmentation = aug ? &*aug : nullptr;
    const auto rows = run_ablation(corpus.view(), spec, configs, plan, options);

    std::ostringstream csv;
    write_ablation_csv(csv, rows);
    ctx.write_out("ablation.csv", csv.str());
    const auto table = format_ablation_table(rows);
    ctx.write_out("ablation.txt", table);
    ctx.out << table;
    ctx.write_manifest(ctx.cfg.out);
    return kExitOk;
}

int cmd_importance(Context& ctx) {
    TrainedModel model;
    if (!ctx.flags.model.empty()) {
        ctx.note_input(ctx.flags.model);
        model = load_model(ctx.flags.model);
    } else {
        const auto corpus = load_corpus(ctx);
        model = train_model(spec_for(ctx.cfg, ctx.cfg.model_type.value_or(ModelType::RandomForest)), corpus.records,
                            corpus.tokens, corpus.watchlist);
    }
    const auto ranked = rank_feature_importance(model);
    std::ostringstream csv;
    write_importance_csv(csv, ranked);
    ctx.write_out("importance.csv", csv.str());
    ctx.out << "top features (" << model_type_name(model.spec.type) << "):\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, ranked.size()); ++i) {
        ctx.out << "  " << (i + 1) << ". " << ranked[i].name << "  " << format_fixed(ranked[i].weight) << "\n";
    }
    ctx.write_manifest(ctx.cfg.out);
    return kExitOk;
}

int cmd_predict(Context& ctx) {
    const auto model_path = require(ctx.flags.model, "--model");
    const auto input = require(ctx.flags.input, "--in");
    ctx.note_input(model_path);
    ctx.note_input(input);
    const auto model = load_model(model_path);
    const auto resources = TextResources::load(ctx.cfg.data_dir);
    const auto records = load_dataset(input);

    std::string lines;
    for (const auto& r : records) {
        auto j = ojson{{"app_id", r.app_id}};
        const auto verdict = verdict_to_json(verify_record(model, resources, r, ctx.flags.top_k));
        for (const auto& [k, v] : verdict.items()) j[k] = v;
        lines += j.dump() + "\n";
    }
    ctx.out << lines;
    ctx.write_out("predictions.jsonl", lines);
    ctx.write_manifest(ctx.cfg.out);
    return kExitOk;
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

int cmd_serve(Context& ctx) {
    const auto model_path = require(ctx.flags.model, "--model");
    ctx.note_input(model_path);
    VerifyService service(TextResources::load(ctx.cfg.data_dir), ctx.flags.top_k);
    service.install(std::make_shared<const TrainedModel>(load_model(model_path)));
    HttpServer server(service);
    const int port = server.bind(ctx.flags.host, ctx.flags.port);
    ctx.write_manifest(ctx.cfg.out, {{"listen", ctx.flags.host + ":" + std::to_string(port)}});
    ctx.out << "listening on http://" << ctx.flags.host << ":" << port << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Official/unofficial classifier for Hajj and Umrah travel apps", "umrahguard"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", UMRAHGUARD_VERSION);
    Flags flags;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON run config; flags override its fields")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "Seed for every random choice (default 42)");
        sub->add_option("--folds", flags.folds, "Cross-validation folds (default 10)");
        sub->add_option("--out", flags.out, "Output directory (gen-data: dataset file)");
        sub->add_option("--data-dir", flags.data_dir, "Directory with stopwords-id.txt and kata-dasar.txt");
    };
    auto data_opts = [&](CLI::App* sub) {
        sub->add_option("--data", flags.data, "Labeled JSON-lines dataset");
        sub->add_option("--registry", flags.registry, "Registry snapshot; labels unlabeled records, sets watchlist");
    };
    auto model_opts = [&](CLI::App* sub) {
        sub->add_option("--type", flags.type, "Classifier: nb, rf or svm");
        sub->add_option("--metric", flags.metric, "Selection metric: accuracy or f1");
        sub->add_flag("--augment", flags.augment, "Synonym augmentation of training folds");
    };

    auto* gen = app.add_subcommand("gen-data", "Generate the seeded synthetic dataset and registry");
    common(gen);
    gen->add_option("--n-official", flags.n_official, "Official records (default 100)");
    gen->add_option("--n-unofficial", flags.n_unofficial, "Unofficial records (default 100)");

    auto* train = app.add_subcommand("train", "Train one classifier on the full dataset");
    common(train);
    data_opts(train);
    model_opts(train);

    auto* evaluate = app.add_subcommand("evaluate", "Cross-validated metrics, or held-out metrics with --model/--in");
    common(evaluate);
    data_opts(evaluate);
    model_opts(evaluate);
    evaluate->add_option("--model", flags.model, "Saved model for held-out evaluation");
    evaluate->add_option("--in", flags.input, "Labeled held-out dataset");

    auto* grid = app.add_subcommand("grid-search", "Exhaustive hyperparameter search with CV");
    common(grid);
    data_opts(grid);
    model_opts(grid);

    auto* ablate = app.add_subcommand("ablate", "Compare feature configurations under CV");
    common(ablate);
    data_opts(ablate);
    model_opts(ablate);

    auto* importance = app.add_subcommand("importance", "Rank features of a saved or freshly trained model");
    common(importance);
    data_opts(importance);
    model_opts(importance);
    importance->add_option("--model", flags.model, "Saved model (otherwise trains on --data)");

    auto* predict_cmd = app.add_subcommand("predict", "Label unseen records with a saved model");
    common(predict_cmd);
    predict_cmd->add_option("--model", flags.model, "Saved model")->required();
    predict_cmd->add_option("--in", flags.input, "JSON-lines records")->required();
    predict_cmd->add_option("--top-k", flags.top_k, "Contributing features per record (default 5)");

    auto* serve = app.add_subcommand("serve", "HTTP verification service");
    common(serve);
    serve->add_option("--model", flags.model, "Saved model")->required();
    serve->add_option("--host", flags.host, "Bind address (default 127.0.0.1)");
    serve->add_option("--port", flags.port, "Port; 0 picks a free one (default 8080)");
    serve->add_option("--top-k", flags.top_k, "Contributing features per response (default 5)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    auto* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        Context ctx{out, err, command, args, effective_config(flags), flags, {}, {}};
        if (command == "gen-data") return cmd_gen_data(ctx);
        if (command == "train") return cmd_train(ctx);
        if (command == "evaluate") return cmd_evaluate(ctx);
        if (command == "grid-search") return cmd_grid_search(ctx);
        if (command == "ablate") return cmd_ablate(ctx);
        if (command == "importance") return cmd_importance(ctx);
        if (command == "predict") return cmd_predict(ctx);
        if (command == "serve") return cmd_serve(ctx);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n\n" << chosen->help();
        return kExitUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitUsageError;
}

}  // namespace umrahguard::cli

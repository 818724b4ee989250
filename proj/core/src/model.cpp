#include "umrahguard/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <zlib.h>

#include "umrahguard/errors.hpp"

namespace umrahguard {

using ojson = nlohmann::ordered_json;

std::string_view model_type_name(ModelType t) noexcept {
    switch (t) {
        case ModelType::NaiveBayes: return "nb";
        case ModelType::RandomForest: return "rf";
        case ModelType::Svm: return "svm";
    }
    return "unknown";
}

ModelType parse_model_type(std::string_view name) {
    if (name == "nb" || name == "naive_bayes") return ModelType::NaiveBayes;
    if (name == "rf" || name == "random_forest") return ModelType::RandomForest;
    if (name == "svm") return ModelType::Svm;
    throw ValidationError("unknown model type '" + std::string(name) + "'");
}

// --- parameters ------------------------------------------------------------

namespace {

const ojson* find_param(const ParamSet& params, const char* key) {
    const auto it = params.find(key);
    return it == params.end() ? nullptr : &*it;
}

double number_param(const ParamSet& params, const char* key, double fallback) {
    const auto* v = find_param(params, key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ValidationError(std::string("parameter '") + key + "' must be a number");
    return v->get<double>();
}

std::size_t count_param(const ParamSet& params, const char* key, std::size_t fallback) {
    const auto* v = find_param(params, key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        throw ValidationError(std::string("parameter '") + key + "' must be a non-negative integer");
    }
    return v->get<std::size_t>();
}

std::string string_param(const ParamSet& params, const char* key, const char* fallback) {
    const auto* v = find_param(params, key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ValidationError(std::string("parameter '") + key + "' must be a string");
    return v->get<std::string>();
}

std::optional<std::size_t> depth_param(const ParamSet& params) {
    const auto* v = find_param(params, "max_depth");
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (v->is_string() && (v->get<std::string>() == "None" || v->get<std::string>() == "none")) return std::nullopt;
    if (!v->is_number_integer() || v->get<std::int64_t>() <= 0) {
        throw ValidationError("parameter 'max_depth' must be a positive integer or null");
    }
    return v->get<std::size_t>();
}

const std::set<std::string>& allowed_keys(ModelType t) {
    static const std::set<std::string> nb{"alpha"};
    static const std::set<std::string> rf{"n_estimators", "max_depth", "criterion", "features_per_split"};
    static const std::set<std::string> svm{"kernel", "C", "gamma", "degree", "coef0", "tol", "max_passes"};
    switch (t) {
        case ModelType::NaiveBayes: return nb;
        case ModelType::RandomForest: return rf;
        case ModelType::Svm: return svm;
    }
    return nb;
}

RFParams rf_params(const ModelSpec& spec) {
    RFParams p;
    p.n_estimators = count_param(spec.params, "n_estimators", 100);
    p.max_depth = depth_param(spec.params);
    p.criterion = parse_criterion(string_param(spec.params, "criterion", "gini"));
    if (const auto* v = find_param(spec.params, "features_per_split"); v != nullptr && !v->is_null()) {
        p.features_per_split = count_param(spec.params, "features_per_split", 1);
    }
    p.seed = spec.seed;
    return p;
}

KernelSpec kernel_params(const ModelSpec& spec, std::span<const SparseVector> X) {
    KernelSpec k;
    k.kind = parse_kernel(string_param(spec.params, "kernel", "rbf"));
    k.degree = static_cast<int>(count_param(spec.params, "degree", 3));
    k.coef0 = number_param(spec.params, "coef0", 1.0);
    const auto* g = find_param(spec.params, "gamma");
    if (g == nullptr || (g->is_string() && g->get<std::string>() == "scale")) {
        k.gamma = X.empty() ? 1.0 : gamma_scale(X);
    } else if (g->is_string() && g->get<std::string>() == "auto") {
        k.gamma = X.empty() ? 1.0 : gamma_auto(X);
    } else if (g->is_number()) {
        k.gamma = g->get<double>();
    } else {
        throw ValidationError("parameter 'gamma' must be a number, \"scale\" or \"auto\"");
    }
    if (k.kind == KernelKind::Linear) {
        k.gamma = 0.0;
        k.degree = 0;
        k.coef0 = 0.0;
    } else if (k.kind == KernelKind::Rbf) {
        k.degree = 0;
        k.coef0 = 0.0;
    }
    return k;
}

}  // namespace

ModelSpec ModelSpec::reference(ModelType type, std::uint64_t seed) {
    ModelSpec s;
    s.type = type;
    s.seed = seed;
    switch (type) {
        case ModelType::NaiveBayes: s.params = {{"alpha", 0.5}}; break;
        case ModelType::RandomForest:
            s.params = {{"n_estimators", 100}, {"max_depth", 20}, {"criterion", "entropy"}};
            break;
        case ModelType::Svm: s.params = {{"kernel", "rbf"}, {"C", 10.0}, {"gamma", 0.1}}; break;
    }
    return s;
}

ModelSpec ModelSpec::with_params(const ParamSet& overrides) const {
    ModelSpec out = *this;
    for (const auto& [k, v] : overrides.items()) out.params[k] = v;
    return out;
}

void ModelSpec::validate() const {
    if (!params.is_object()) throw ValidationError("model params must be a JSON object");
    const auto& allowed = allowed_keys(type);
    for (const auto& [k, v] : params.items()) {
        if (!allowed.contains(k)) {
            throw ValidationError("unknown parameter '" + k + "' for model '" + std::string(model_type_name(type)) + "'");
        }
    }
    features.validate();
    switch (type) {
        case ModelType::NaiveBayes:
            if (!(number_param(params, "alpha", 1.0) > 0.0)) throw ValidationError("parameter 'alpha' must be positive");
            break;
        case ModelType::RandomForest: rf_params(*this).validate(); break;
        case ModelType::Svm: {
            if (!(number_param(params, "C", 1.0) > 0.0)) throw ValidationError("parameter 'C' must be positive");
            if (!(number_param(params, "tol", 1e-3) > 0.0)) throw ValidationError("parameter 'tol' must be positive");
            count_param(params, "max_passes", 10);
            kernel_params(*this, {}).validate();
            break;
        }
    }
}

std::string ModelSpec::describe() const {
    std::string out(model_type_name(type));
    out += params.dump();
    return out;
}

// --- training and prediction -----------------------------------------------

ClassifierModel train_classifier(const ModelSpec& spec, std::span<const SparseVector> X, std::span<const Label> y) {
    spec.validate();
    switch (spec.type) {
        case ModelType::NaiveBayes: return train_nb(X, y, number_param(spec.params, "alpha", 1.0));
        case ModelType::RandomForest: return train_rf(X, y, rf_params(spec));
        case ModelType::Svm: {
            SmoOptions opt;
            opt.tol = number_param(spec.params, "tol", 1e-3);
            opt.max_passes = count_param(spec.params, "max_passes", 10);
            opt.seed = spec.seed;
            return train_svm_smo(X, y, number_param(spec.params, "C", 1.0), kernel_params(spec, X), opt);
        }
    }
    throw ValidationError("unknown model type");
}

Prediction predict(const ClassifierModel& model, const SparseVector& x) {
    return std::visit(
        [&](const auto& m) -> Prediction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NBModel>) {
                const auto p = predict_nb(m, x);
                return {p.label, p.posterior[label_index(p.label)], p.posterior[1]};
            } else if constexpr (std::is_same_v<T, RFModel>) {
                const auto p = predict_rf(m, x);
                return {p.label, p.vote_fraction,
                        static_cast<double>(p.unofficial_votes) / static_cast<double>(m.trees.size())};
            } else {
                const auto p = predict_svm(m, x);
                return {p.label, p.confidence, p.margin};
            }
        },
        model);
}

SparseVector TrainedModel::featurize(const AppRecord& record, const TokenDoc& tokens) const {
    return assemble_features(record, tokens, pipeline).flatten();
}

Prediction TrainedModel::predict(const AppRecord& record, const TokenDoc& tokens) const {
    return umrahguard::predict(classifier, featurize(record, tokens));
}

std::vector<Label> labels_of(std::span<const AppRecord> records) {
    std::vector<Label> y;
    y.reserve(records.size());
    for (const auto& r : records) {
        if (!r.label) throw ValidationError("record '" + r.app_id + "' has no label");
        y.push_back(*r.label);
    }
    return y;
}

TrainedModel train_model(const ModelSpec& spec, std::span<const AppRecord> records, std::span<const TokenDoc> tokens,
                         const std::vector<std::string>& watchlist) {
    spec.validate();
    TrainedModel model;
    model.spec = spec;
    model.pipeline = FeaturePipeline::fit(records, tokens, watchlist, spec.features);
    std::vector<SparseVector> X;
    X.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) X.push_back(model.featurize(records[i], tokens[i]));
    const auto y = labels_of(records);
    model.classifier = train_classifier(spec, X, y);
    return model;
}

// --- explanation -----------------------------------------------------------

std::vector<FeatureWeight> explain(const TrainedModel& model, const SparseVector& x, std::size_t top_k) {
    const auto names = model.pipeline.feature_names();
    std::vector<std::pair<std::uint32_t, double>> contrib;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NBModel>) {
                for (const auto& e : x.entries) {
                    contrib.emplace_back(e.index, std::abs(e.value * (m.log_likelihood[1][e.index] -
                                                                      m.log_likelihood[0][e.index])));
                }
            } else if constexpr (std::is_same_v<T, RFModel>) {
                const auto imp = rf_feature_importance(m);
                for (const auto& e : x.entries) contrib.emplace_back(e.index, imp[e.index]);
            } else if (m.kernel.kind == KernelKind::Linear) {
                std::vector<double> w(m.dim, 0.0);
                for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
                    for (const auto& e : m.support_vectors[s].entries) w[e.index] += m.dual_coefs[s] * e.value;
                }
                for (const auto& e : x.entries) contrib.emplace_back(e.index, std::abs(w[e.index] * e.value));
            } else {
                const double base = m.decision(x);
                for (std::size_t k = 0; k < x.entries.size(); ++k) {
                    SparseVector occluded = x;
                    occluded.entries.erase(occluded.entries.begin() + static_cast<std::ptrdiff_t>(k));
                    contrib.emplace_back(x.entries[k].index, std::abs(base - m.decision(occluded)));
                }
            }
        },
        model.classifier);

    double total = 0.0;
    for (const auto& [idx, w] : contrib) total += w;
    std::stable_sort(contrib.begin(), contrib.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<FeatureWeight> out;
    for (const auto& [idx, w] : contrib) {
        if (out.size() >= top_k) break;
        out.push_back({names.at(idx), total > 0.0 ? w / total : 0.0});
    }
    return out;
}

// --- persistence -----------------------------------------------------------

namespace {

ojson sparse_to_json(const SparseVector& v) {
    ojson idx = ojson::array(), val = ojson::array();
    for (const auto& e : v.entries) {
        idx.push_back(e.index);
        val.push_back(e.value);
    }
    return ojson{{"indices", std::move(idx)}, {"values", std::move(val)}};
}

SparseVector sparse_from_json(const ojson& j, std::size_t dim) {
    SparseVector v;
    v.dim = dim;
    const auto& idx = j.at("indices");
    const auto& val = j.at("values");
    if (idx.size() != val.size()) throw ValidationError("sparse vector: indices/values length mismatch");
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto i = idx[k].get<std::uint32_t>();
        if (i >= dim || (!v.entries.empty() && i <= v.entries.back().index)) {
            throw ValidationError("sparse vector: indices must be increasing and in range");
        }
        v.entries.push_back({i, val[k].get<double>()});
    }
    return v;
}

template <std::size_t N>
ojson array_to_json(const std::array<double, N>& a) {
    return ojson(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array_from_json(const ojson& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != N) throw ValidationError("array has wrong length");
    std::array<double, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

ojson features_to_json(const FeatureConfig& c) {
    return {{"text", c.use_text}, {"permissions", c.use_permissions}, {"metadata", c.use_metadata}};
}

FeatureConfig features_from_json(const ojson& j) {
    FeatureConfig c;
    c.use_text = j.at("text").get<bool>();
    c.use_permissions = j.at("permissions").get<bool>();
    c.use_metadata = j.at("metadata").get<bool>();
    return c;
}

ojson pipeline_to_json(const FeaturePipeline& p) {
    ojson j;
    j["vocabulary"] = p.tfidf.terms;
    j["document_frequency"] = p.tfidf.document_frequency;
    j["n_documents"] = p.tfidf.n_documents;
    j["idf"] = p.tfidf.idf;
    j["watchlist"] = p.watchlist;
    j["meta_stats"] = {{"features", std::vector<std::string>(kMetaFeatureNames.begin(), kMetaFeatureNames.end())},
                       {"min", array_to_json(p.meta_stats.min)},
                       {"max", array_to_json(p.meta_stats.max)},
                       {"mean", array_to_json(p.meta_stats.mean)}};
    j["feature_config"] = features_to_json(p.config);
    return j;
}

FeaturePipeline pipeline_from_json(const ojson& j) {
    FeaturePipeline p;
    p.tfidf.terms = j.at("vocabulary").get<std::vector<std::string>>();
    p.tfidf.document_frequency = j.at("document_frequency").get<std::vector<std::size_t>>();
    p.tfidf.n_documents = j.at("n_documents").get<std::size_t>();
    p.tfidf.idf = j.at("idf").get<std::vector<double>>();
    if (p.tfidf.idf.size() != p.tfidf.terms.size() || p.tfidf.document_frequency.size() != p.tfidf.terms.size()) {
        throw ValidationError("pipeline: vocabulary/idf length mismatch");
    }
    p.tfidf.reindex();
    p.watchlist = j.at("watchlist").get<std::vector<std::string>>();
    const auto& ms = j.at("meta_stats");
    p.meta_stats.min = array_from_json<kMetaFeatureCount>(ms.at("min"));
    p.meta_stats.max = array_from_json<kMetaFeatureCount>(ms.at("max"));
    p.meta_stats.mean = array_from_json<kMetaFeatureCount>(ms.at("mean"));
    p.config = features_from_json(j.at("feature_config"));
    return p;
}

ojson classifier_to_json(const ClassifierModel& model) {
    return std::visit(
        [](const auto& m) -> ojson {
            using T = std::decay_t<decltype(m)>;
            ojson j;
            if constexpr (std::is_same_v<T, NBModel>) {
                j["alpha"] = m.alpha;
                j["log_prior"] = array_to_json(m.log_prior);
                j["log_likelihood"] = {m.log_likelihood[0], m.log_likelihood[1]};
            } else if constexpr (std::is_same_v<T, RFModel>) {
                j["n_estimators"] = m.params.n_estimators;
                j["max_depth"] = m.params.max_depth ? ojson(*m.params.max_depth) : ojson(nullptr);
                j["criterion"] = criterion_name(m.params.criterion);
                j["features_per_split"] = m.features_per_split;
                j["seed"] = m.params.seed;
                j["dim"] = m.dim;
                ojson trees = ojson::array();
                for (const auto& t : m.trees) {
                    ojson feature = ojson::array(), threshold = ojson::array(), left = ojson::array(),
                          right = ojson::array(), counts = ojson::array(), decrease = ojson::array();
                    for (const auto& n : t.nodes) {
                        feature.push_back(n.feature);
                        threshold.push_back(n.threshold);
                        left.push_back(n.left);
                        right.push_back(n.right);
                        counts.push_back(array_to_json(n.counts));
                        decrease.push_back(n.impurity_decrease);
                    }
                    trees.push_back({{"seed", t.seed},
                                     {"feature", std::move(feature)},
                                     {"threshold", std::move(threshold)},
                                     {"left", std::move(left)},
                                     {"right", std::move(right)},
                                     {"counts", std::move(counts)},
                                     {"impurity_decrease", std::move(decrease)}});
                }
                j["trees"] = std::move(trees);
            } else {
                j["kernel"] = {{"kind", kernel_name(m.kernel.kind)},
                               {"gamma", m.kernel.gamma},
                               {"degree", m.kernel.degree},
                               {"coef0", m.kernel.coef0}};
                j["C"] = m.C;
                j["bias"] = m.bias;
                j["dim"] = m.dim;
                j["dual_coefs"] = m.dual_coefs;
                ojson svs = ojson::array();
                for (const auto& sv : m.support_vectors) svs.push_back(sparse_to_json(sv));
                j["support_vectors"] = std::move(svs);
            }
            return j;
        },
        model);
}

ClassifierModel classifier_from_json(ModelType type, const ojson& j) {
    switch (type) {
        case ModelType::NaiveBayes: {
            NBModel m;
            m.alpha = j.at("alpha").get<double>();
            m.log_prior = array_from_json<2>(j.at("log_prior"));
            m.log_likelihood[0] = j.at("log_likelihood").at(0).get<std::vector<double>>();
            m.log_likelihood[1] = j.at("log_likelihood").at(1).get<std::vector<double>>();
            if (m.log_likelihood[0].size() != m.log_likelihood[1].size()) {
                throw ValidationError("nb: likelihood rows differ in length");
            }
            return m;
        }
        case ModelType::RandomForest: {
            RFModel m;
            m.params.n_estimators = j.at("n_estimators").get<std::size_t>();
            if (!j.at("max_depth").is_null()) m.params.max_depth = j.at("max_depth").get<std::size_t>();
            m.params.criterion = parse_criterion(j.at("criterion").get<std::string>());
            m.features_per_split = j.at("features_per_split").get<std::size_t>();
            m.params.features_per_split = m.features_per_split;
            m.params.seed = j.at("seed").get<std::uint64_t>();
            m.dim = j.at("dim").get<std::size_t>();
            for (const auto& tj : j.at("trees")) {
                DecisionTree t;
                t.seed = tj.at("seed").get<std::uint64_t>();
                const auto& feature = tj.at("feature");
                const std::size_t count = feature.size();
                for (std::size_t k = 0; k < count; ++k) {
                    TreeNode n;
                    n.feature = feature[k].get<std::int32_t>();
                    n.threshold = tj.at("threshold").at(k).get<double>();
                    n.left = tj.at("left").at(k).get<std::int32_t>();
                    n.right = tj.at("right").at(k).get<std::int32_t>();
                    n.counts = array_from_json<2>(tj.at("counts").at(k));
                    n.impurity_decrease = tj.at("impurity_decrease").at(k).get<double>();
                    const auto in_range = [&](std::int32_t c) { return c > 0 && static_cast<std::size_t>(c) < count; };
                    if (!n.is_leaf() && (static_cast<std::size_t>(n.feature) >= m.dim || !in_range(n.left) ||
                                         !in_range(n.right))) {
                        throw ValidationError("rf: node references out of range");
                    }
                    t.nodes.push_back(n);
                }
                if (t.nodes.empty()) throw ValidationError("rf: empty tree");
                m.trees.push_back(std::move(t));
            }
            if (m.trees.size() != m.params.n_estimators) throw ValidationError("rf: tree count mismatch");
            return m;
        }
        case ModelType::Svm: {
            SVMModel m;
            const auto& k = j.at("kernel");
            m.kernel.kind = parse_kernel(k.at("kind").get<std::string>());
            m.kernel.gamma = k.at("gamma").get<double>();
            m.kernel.degree = k.at("degree").get<int>();
            m.kernel.coef0 = k.at("coef0").get<double>();
            m.C = j.at("C").get<double>();
            m.bias = j.at("bias").get<double>();
            m.dim = j.at("dim").get<std::size_t>();
            m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
            for (const auto& sv : j.at("support_vectors")) m.support_vectors.push_back(sparse_from_json(sv, m.dim));
            if (m.support_vectors.size() != m.dual_coefs.size()) throw ValidationError("svm: coefficient count mismatch");
            return m;
        }
    }
    throw ValidationError("unknown model type");
}

std::string checksum_of(const std::string& payload) {
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return std::string("crc32:") + buf;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    ojson doc;
    doc["version"] = model.version;
    doc["label_convention"] = {{"0", "official"}, {"1", "unofficial"}, {"positive", "official"}};
    doc["pipeline"] = pipeline_to_json(model.pipeline);
    ojson m;
    m["type"] = model_type_name(model.spec.type);
    m["params"] = model.spec.params;
    m["seed"] = model.spec.seed;
    m["state"] = classifier_to_json(model.classifier);
    doc["model"] = std::move(m);
    const auto payload = doc.dump();
    doc["checksum"] = checksum_of(payload);
    return doc.dump() + "\n";
}

TrainedModel parse_model(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ModelFileError(ModelFileError::Kind::Checksum, std::string("model file is corrupt or truncated: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string()) {
        throw ModelFileError(ModelFileError::Kind::Checksum, "model file has no version string");
    }
    const auto version = doc["version"].get<std::string>();
    if (version != TrainedModel::kFormatVersion) {
        throw ModelFileError(ModelFileError::Kind::UnsupportedVersion,
                             "unsupported model format version '" + version + "' (expected '" +
                                 std::string(TrainedModel::kFormatVersion) + "')");
    }
    const auto it = doc.find("checksum");
    if (it == doc.end() || !it->is_string()) throw ModelFileError(ModelFileError::Kind::Checksum, "model file has no checksum");
    const auto stored = it->get<std::string>();
    doc.erase("checksum");
    if (checksum_of(doc.dump()) != stored) {
        throw ModelFileError(ModelFileError::Kind::Checksum, "model file checksum mismatch");
    }

    try {
        TrainedModel model;
        model.version = version;
        model.pipeline = pipeline_from_json(doc.at("pipeline"));
        const auto& m = doc.at("model");
        model.spec.type = parse_model_type(m.at("type").get<std::string>());
        model.spec.params = m.at("params");
        model.spec.seed = m.at("seed").get<std::uint64_t>();
        model.spec.features = model.pipeline.config;
        model.classifier = classifier_from_json(model.spec.type, m.at("state"));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFileError(ModelFileError::Kind::Checksum, std::string("model file content is invalid: ") + e.what());
    } catch (const ValidationError& e) {
        throw ModelFileError(ModelFileError::Kind::Checksum, std::string("model file content is invalid: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    const auto text = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFileError(ModelFileError::Kind::Io, "cannot write model file: " + path.string());
    out << text;
    if (!out) throw ModelFileError(ModelFileError::Kind::Io, "write failure: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFileError(ModelFileError::Kind::Io, "cannot open model file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace umrahguard

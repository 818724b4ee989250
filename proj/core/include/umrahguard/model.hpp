#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "umrahguard/corpus.hpp"
#include "umrahguard/features.hpp"
#include "umrahguard/naive_bayes.hpp"
#include "umrahguard/random_forest.hpp"
#include "umrahguard/svm.hpp"

namespace umrahguard {

enum class ModelType { NaiveBayes, RandomForest, Svm };

std::string_view model_type_name(ModelType t) noexcept;  // "nb" | "rf" | "svm"
ModelType parse_model_type(std::string_view name);

/// Hyperparameters as a JSON object, keyed by the names used in run configs:
///   nb:  alpha
///   rf:  n_estimators, max_depth (integer or null), criterion, features_per_split
///   svm: kernel, C, gamma (number, "scale" or "auto"), degree, coef0, tol, max_passes
using ParamSet = nlohmann::ordered_json;

struct ModelSpec {
    ModelType type = ModelType::Svm;
    ParamSet params = ParamSet::object();
    FeatureConfig features;
    std::uint64_t seed = 42;

    /// Best settings of the published grid: SVM rbf/C=10/gamma=0.1,
    /// RF 100 trees/depth 20/entropy, NB alpha=0.5.
    static ModelSpec reference(ModelType type, std::uint64_t seed = 42);

    /// Copy with `overrides` merged over params (override keys win).
    ModelSpec with_params(const ParamSet& overrides) const;

    /// Throws ValidationError on unknown keys or ill-typed values.
    void validate() const;
    std::string describe() const;
};

using ClassifierModel = std::variant<NBModel, RFModel, SVMModel>;

struct Prediction {
    Label label = Label::Official;
    /// NB posterior, RF vote fraction or squashed SVM margin of the winner.
    double confidence = 0.5;
    /// NB P(Unofficial), RF Unofficial vote share, SVM margin.
    double score = 0.0;
};

ClassifierModel train_classifier(const ModelSpec& spec, std::span<const SparseVector> X, std::span<const Label> y);
Prediction predict(const ClassifierModel& model, const SparseVector& x);

/// Fitted feature pipeline plus classifier; the unit persisted to disk.
struct TrainedModel {
    static constexpr std::string_view kFormatVersion = "umrahguard-model/1";

    std::string version{kFormatVersion};
    FeaturePipeline pipeline;
    ClassifierModel classifier;
    ModelSpec spec;

    SparseVector featurize(const AppRecord& record, const TokenDoc& tokens) const;
    Prediction predict(const AppRecord& record, const TokenDoc& tokens) const;
};

/// Labels of `records` as a vector; throws ValidationError on an unlabeled record.
std::vector<Label> labels_of(std::span<const AppRecord> records);

/// Fits the pipeline on `records` and trains the classifier on the result.
TrainedModel train_model(const ModelSpec& spec, std::span<const AppRecord> records, std::span<const TokenDoc> tokens,
                         const std::vector<std::string>& watchlist);

struct FeatureWeight {
    std::string name;
    double weight = 0.0;

    bool operator==(const FeatureWeight&) const = default;
};

/// Per-input attribution over the non-zero features of `x`, normalized to
/// sum to 1 and truncated to `top_k`. NB: |x_j (ll_U - ll_O)|; linear SVM:
/// |w_j x_j|; kernel SVM: |f(x) - f(x without j)|; RF: global importance.
std::vector<FeatureWeight> explain(const TrainedModel& model, const SparseVector& x, std::size_t top_k);

std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
/// Throws ModelFileError (Io, Checksum, UnsupportedVersion).
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace umrahguard

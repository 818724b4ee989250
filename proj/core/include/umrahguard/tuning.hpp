#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/model.hpp"
#include "umrahguard/textprep.hpp"

namespace umrahguard {

/// Named axes of candidate values; enumerated as a cartesian product in
/// declaration order with the last axis varying fastest.
struct ParamGrid {
    std::vector<std::pair<std::string, std::vector<nlohmann::ordered_json>>> axes;

    /// `{"C": [0.1, 1], "kernel": ["rbf"]}`; key order is preserved.
    static ParamGrid from_json(const nlohmann::ordered_json& j);

    void validate() const;
    std::size_t size() const;
    std::vector<ParamSet> candidates() const;
};

struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;  // fold index per sample
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded shuffle inside each class, then round-robin over folds. The
/// round-robin continues across classes, so fold sizes also differ by at most 1.
FoldPlan stratified_k_fold(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

enum class ScoreMetric { Accuracy, F1 };
std::string_view metric_name(ScoreMetric m) noexcept;
ScoreMetric parse_metric(std::string_view name);

/// Synonym-replacement augmentation applied to training folds only.
struct Augmentation {
    SynonymMap synonyms;
    double rate = 0.2;
    std::size_t copies = 1;
    std::uint64_t seed = 0;
};

/// Records with their preprocessed descriptions. `resources` is needed only
/// when augmentation creates new descriptions that must be preprocessed.
struct Corpus {
    std::span<const AppRecord> records;
    std::span<const TokenDoc> tokens;
    std::vector<std::string> watchlist;
    const TextResources* resources = nullptr;
};

struct CvOptions {
    ScoreMetric metric = ScoreMetric::Accuracy;
    const Augmentation* augmentation = nullptr;
    /// Worker threads for fold-level parallelism; 0 picks the hardware count.
    std::size_t threads = 0;
    /// Called after each fold's pipeline is fitted, with that fold's test indices.
    std::function<void(std::size_t fold, const FeaturePipeline&, std::span<const std::size_t>)> on_fold_fitted;
};

struct CvResult {
    std::vector<double> fold_scores;
    double mean = 0.0;
    double std = 0.0;  // population
    /// Out-of-fold prediction for every sample, indexed like the corpus.
    std::vector<Label> predictions;
    std::vector<double> confidences;
};

CvResult cross_validate(const ModelSpec& spec, const Corpus& corpus, const FoldPlan& plan, const CvOptions& options = {});

/// Training set after optional augmentation: records and their token lists.
struct TrainingSet {
    std::vector<AppRecord> records;
    std::vector<TokenDoc> tokens;
};
TrainingSet build_training_set(const Corpus& corpus, std::span<const std::size_t> indices,
                               const Augmentation* augmentation, std::uint64_t stream);

struct CandidateScore {
    ParamSet params;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> fold_scores;
};

struct SearchResult {
    ParamSet best_params;
    double best_score = 0.0;
    std::size_t best_index = 0;
    std::vector<CandidateScore> candidates;  // enumeration order
    TrainedModel final_model;
};

/// Exhaustive search; candidate i replaces the incumbent only when its mean
/// is strictly greater. The winner is refit on the full corpus.
SearchResult grid_search(const ModelSpec& base, const ParamGrid& grid, const Corpus& corpus, const FoldPlan& plan,
                         const CvOptions& options = {});

/// Runs fn(0..n-1) on up to `threads` workers; the exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace umrahguard

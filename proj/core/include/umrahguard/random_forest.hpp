#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/sparse.hpp"

namespace umrahguard {

enum class Criterion { Gini, Entropy };

std::string_view criterion_name(Criterion c) noexcept;
Criterion parse_criterion(std::string_view name);  // "gini" | "entropy"

/// Gini = 1 - sum p^2; entropy = -sum p log2 p with 0 log 0 = 0.
/// Throws ValidationError on a zero or negative total.
double impurity(std::span<const double> class_counts, Criterion criterion);

struct TreeNode {
    /// -1 marks a leaf.
    std::int32_t feature = -1;
    double threshold = 0.0;  // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<double, 2> counts{};  // bootstrap samples reaching the node, per class
    /// Weighted impurity decrease of this split (n_node / n_root scaled).
    double impurity_decrease = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::uint64_t seed = 0;

    std::size_t depth() const;
    /// Majority class of the reached leaf; ties go to Official.
    Label predict(const SparseVector& x) const;
};

struct RFParams {
    std::size_t n_estimators = 100;
    std::optional<std::size_t> max_depth;  // nullopt = grow to purity
    Criterion criterion = Criterion::Gini;
    /// Defaults to ceil(sqrt(d)).
    std::optional<std::size_t> features_per_split;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RFModel {
    RFParams params;
    std::size_t dim = 0;
    std::size_t features_per_split = 1;
    std::vector<DecisionTree> trees;
};

struct RFPrediction {
    Label label = Label::Official;
    double vote_fraction = 1.0;  // winning votes / n_estimators
    std::size_t unofficial_votes = 0;
};

/// Bootstrap-sampled trees with per-tree seeds derived from params.seed.
/// Features that are constant within a node are skipped without counting
/// toward the features_per_split quota.
RFModel train_rf(std::span<const SparseVector> X, std::span<const Label> y, const RFParams& params);

RFPrediction predict_rf(const RFModel& model, const SparseVector& x);

/// Mean weighted impurity decrease per feature across trees, normalized to
/// sum to 1 (all zeros when no tree ever split).
std::vector<double> rf_feature_importance(const RFModel& model);

}  // namespace umrahguard

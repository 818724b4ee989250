#include "umrahguard/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "umrahguard/errors.hpp"
#include "umrahguard/rng.hpp"

namespace umrahguard {

std::string_view criterion_name(Criterion c) noexcept { return c == Criterion::Gini ? "gini" : "entropy"; }

Criterion parse_criterion(std::string_view name) {
    if (name == "gini") return Criterion::Gini;
    if (name == "entropy") return Criterion::Entropy;
    throw ValidationError("unknown split criterion '" + std::string(name) + "'");
}

double impurity(std::span<const double> class_counts, Criterion criterion) {
    double total = 0.0;
    for (double c : class_counts) {
        if (c < 0.0) throw ValidationError("impurity: negative class count");
        total += c;
    }
    if (!(total > 0.0)) throw ValidationError("impurity: zero total count");
    double acc = 0.0;
    for (double c : class_counts) {
        const double p = c / total;
        if (criterion == Criterion::Gini) {
            acc += p * p;
        } else if (p > 0.0) {
            acc -= p * std::log2(p);
        }
    }
    return criterion == Criterion::Gini ? 1.0 - acc : acc;
}

void RFParams::validate() const {
    if (n_estimators == 0) throw ValidationError("random forest: n_estimators must be positive");
    if (max_depth && *max_depth == 0) throw ValidationError("random forest: max_depth must be positive");
    if (features_per_split && *features_per_split == 0) {
        throw ValidationError("random forest: features_per_split must be positive");
    }
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const auto& n = nodes[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return best;
}

namespace {

double feature_value(const SparseVector& x, std::uint32_t feature) {
    const auto it = std::lower_bound(x.entries.begin(), x.entries.end(), feature,
                                     [](const SparseEntry& e, std::uint32_t f) { return e.index < f; });
    return it != x.entries.end() && it->index == feature ? it->value : 0.0;
}

Label majority(const std::array<double, 2>& counts) {
    return counts[1] > counts[0] ? Label::Unofficial : Label::Official;
}

/// Column-major dense copy of the training matrix.
class DenseColumns {
public:
    DenseColumns(std::span<const SparseVector> X, std::size_t dim) : n_(X.size()), data_(dim * X.size(), 0.0) {
        for (std::size_t i = 0; i < X.size(); ++i) {
            for (const auto& e : X[i].entries) data_[e.index * n_ + i] = e.value;
        }
    }
    double at(std::size_t feature, std::size_t row) const { return data_[feature * n_ + row]; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

struct SplitChoice {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const DenseColumns& cols, std::span<const Label> y, std::size_t dim, const RFParams& params,
                std::size_t quota, std::uint64_t seed)
        : cols_(cols), y_(y), dim_(dim), params_(params), quota_(quota), rng_(seed) {}

    DecisionTree build() {
        std::vector<std::size_t> sample(y_.size());
        for (auto& s : sample) s = rng_.below(y_.size());
        root_size_ = static_cast<double>(sample.size());
        DecisionTree tree;
        grow(tree, sample, 0);
        return tree;
    }

private:
    std::int32_t grow(DecisionTree& tree, const std::vector<std::size_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::array<double, 2> counts{};
        for (auto r : rows) counts[label_index(y_[r])] += 1.0;
        tree.nodes[static_cast<std::size_t>(id)].counts = counts;

        const bool pure = counts[0] == 0.0 || counts[1] == 0.0;
        const bool depth_limited = params_.max_depth && depth >= *params_.max_depth;
        if (pure || depth_limited || rows.size() < 2) return id;

        const auto split = best_split(rows, counts);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows) {
            (cols_.at(static_cast<std::size_t>(split.feature), r) <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        const auto left = grow(tree, left_rows, depth + 1);
        const auto right = grow(tree, right_rows, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        node.impurity_decrease = split.decrease;
        return id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows, const std::array<double, 2>& counts) {
        const double n = static_cast<double>(rows.size());
        const double parent = impurity(counts, params_.criterion);
        SplitChoice best;
        double best_gain = 1e-12;

        std::vector<std::uint32_t> order(dim_);
        std::iota(order.begin(), order.end(), 0U);
        std::vector<std::pair<double, int>> values(rows.size());
        std::size_t examined = 0;
        // Lazy Fisher-Yates: draw features one at a time until the quota of
        // non-constant features is met.
        for (std::size_t k = 0; k < dim_ && examined < quota_; ++k) {
            std::swap(order[k], order[k + rng_.below(dim_ - k)]);
            const auto f = order[k];
            for (std::size_t i = 0; i < rows.size(); ++i) values[i] = {cols_.at(f, rows[i]), label_index(y_[rows[i]])};
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            if (lo->first == hi->first) continue;
            ++examined;

            std::sort(values.begin(), values.end());
            std::array<double, 2> left{};
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                left[values[i].second] += 1.0;
                if (values[i].first == values[i + 1].first) continue;
                const std::array<double, 2> right{counts[0] - left[0], counts[1] - left[1]};
                const double nl = left[0] + left[1];
                const double nr = n - nl;
                const double child = (nl / n) * impurity(left, params_.criterion) +
                                     (nr / n) * impurity(right, params_.criterion);
                const double gain = parent - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best.feature = static_cast<std::int32_t>(f);
                    best.threshold = 0.5 * (values[i].first + values[i + 1].first);
                    best.decrease = (n / root_size_) * gain;
                }
            }
        }
        return best;
    }

    const DenseColumns& cols_;
    std::span<const Label> y_;
    std::size_t dim_;
    const RFParams& params_;
    std::size_t quota_;
    Rng rng_;
    double root_size_ = 1.0;
};

}  // namespace

Label DecisionTree::predict(const SparseVector& x) const {
    std::size_t id = 0;
    while (!nodes[id].is_leaf()) {
        const auto& n = nodes[id];
        id = static_cast<std::size_t>(feature_value(x, static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left
                                                                                                          : n.right);
    }
    return majority(nodes[id].counts);
}

RFModel train_rf(std::span<const SparseVector> X, std::span<const Label> y, const RFParams& params) {
    params.validate();
    if (X.size() != y.size()) throw ValidationError("train_rf: X and y differ in length");
    if (X.size() < 2) throw ValidationError("train_rf: at least two samples are required");
    if (std::none_of(y.begin(), y.end(), [](Label l) { return l == Label::Official; }) ||
        std::none_of(y.begin(), y.end(), [](Label l) { return l == Label::Unofficial; })) {
        throw ValidationError("train_rf: both classes are required");
    }
    const std::size_t dim = X.front().dim;
    for (const auto& row : X) {
        if (row.dim != dim) throw ValidationError("train_rf: inconsistent feature dimension");
    }
    if (dim == 0) throw ValidationError("train_rf: zero-width feature vectors");

    RFModel model;
    model.params = params;
    model.dim = dim;
    model.features_per_split =
        std::min(dim, params.features_per_split.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))))));

    const DenseColumns cols(X, dim);
    model.trees.reserve(params.n_estimators);
    for (std::size_t t = 0; t < params.n_estimators; ++t) {
        const auto seed = derive_seed(params.seed, t);
        TreeBuilder builder(cols, y, dim, params, model.features_per_split, seed);
        auto tree = builder.build();
        tree.seed = seed;
        model.trees.push_back(std::move(tree));
    }
    return model;
}

RFPrediction predict_rf(const RFModel& model, const SparseVector& x) {
    if (x.dim != model.dim) throw ValidationError("predict_rf: feature dimension mismatch");
    std::size_t unofficial = 0;
    for (const auto& tree : model.trees) {
        if (tree.predict(x) == Label::Unofficial) ++unofficial;
    }
    const std::size_t official = model.trees.size() - unofficial;
    RFPrediction p;
    p.unofficial_votes = unofficial;
    p.label = unofficial > official ? Label::Unofficial : Label::Official;
    p.vote_fraction = static_cast<double>(std::max(unofficial, official)) / static_cast<double>(model.trees.size());
    return p;
}

std::vector<double> rf_feature_importance(const RFModel& model) {
    std::vector<double> importance(model.dim, 0.0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) importance[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
        }
    }
    const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : importance) v /= total;
    }
    return importance;
}

}  // namespace umrahguard

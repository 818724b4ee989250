#include "umrahguard/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "umrahguard/errors.hpp"
#include "umrahguard/evaluation.hpp"
#include "umrahguard/rng.hpp"

namespace umrahguard {

ParamGrid ParamGrid::from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ValidationError("parameter grid must be a JSON object");
    ParamGrid g;
    for (const auto& [name, values] : j.items()) {
        if (!values.is_array()) throw ValidationError("grid axis '" + name + "' must be a list");
        g.axes.emplace_back(name, std::vector<nlohmann::ordered_json>(values.begin(), values.end()));
    }
    g.validate();
    return g;
}

void ParamGrid::validate() const {
    if (axes.empty()) throw ValidationError("parameter grid is empty");
    for (const auto& [name, values] : axes) {
        if (values.empty()) throw ValidationError("grid axis '" + name + "' has no candidates");
    }
}

std::size_t ParamGrid::size() const {
    std::size_t n = 1;
    for (const auto& axis : axes) n *= axis.second.size();
    return axes.empty() ? 0 : n;
}

std::vector<ParamSet> ParamGrid::candidates() const {
    validate();
    std::vector<ParamSet> out;
    std::vector<std::size_t> pos(axes.size(), 0);
    for (;;) {
        ParamSet p = ParamSet::object();
        for (std::size_t a = 0; a < axes.size(); ++a) p[axes[a].first] = axes[a].second[pos[a]];
        out.push_back(std::move(p));
        // odometer increment, last axis fastest
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++pos[a] < axes[a].second.size()) break;
            pos[a] = 0;
            if (a == 0) return out;
        }
    }
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan stratified_k_fold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("fold count must be at least 2");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), 0);

    std::size_t next = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (label_index(labels[i]) == c) members.push_back(i);
        }
        if (members.size() < k) {
            throw ValidationError("class '" + std::string(label_name(static_cast<Label>(c))) + "' has " +
                                  std::to_string(members.size()) + " samples, fewer than " + std::to_string(k) +
                                  " folds");
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        for (auto i : members) {
            plan.assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    return plan;
}

std::string_view metric_name(ScoreMetric m) noexcept { return m == ScoreMetric::F1 ? "f1" : "accuracy"; }

ScoreMetric parse_metric(std::string_view name) {
    if (name == "accuracy") return ScoreMetric::Accuracy;
    if (name == "f1") return ScoreMetric::F1;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    std::vector<std::exception_ptr> errors(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = cursor++; i < n; i = cursor++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

TrainingSet build_training_set(const Corpus& corpus, std::span<const std::size_t> indices,
                               const Augmentation* augmentation, std::uint64_t stream) {
    TrainingSet set;
    set.records.reserve(indices.size());
    set.tokens.reserve(indices.size());
    for (auto i : indices) {
        set.records.push_back(corpus.records[i]);
        set.tokens.push_back(corpus.tokens[i]);
    }
    if (augmentation == nullptr || augmentation->copies == 0 || augmentation->rate <= 0.0) return set;
    if (corpus.resources == nullptr) throw ValidationError("augmentation needs text resources to preprocess copies");

    const std::set<std::string> stoplist(corpus.resources->stoplist.words.begin(),
                                         corpus.resources->stoplist.words.end());
    auto augmented = augment_synonyms(set.records, augmentation->synonyms, augmentation->rate,
                                      derive_seed(augmentation->seed, stream), stoplist, augmentation->copies);
    // The first indices.size() entries are the originals, already preprocessed.
    for (std::size_t r = set.records.size(); r < augmented.size(); ++r) {
        set.tokens.push_back(preprocess_text(augmented[r].description, *corpus.resources));
    }
    set.records = std::move(augmented);
    return set;
}

namespace {

double score_of(ScoreMetric metric, std::span<const Label> truth, std::span<const Label> predicted) {
    const auto m = compute_metrics(confusion_from_predictions(truth, predicted));
    return metric == ScoreMetric::F1 ? m.f1 : m.accuracy;
}

}  // namespace

CvResult cross_validate(const ModelSpec& spec, const Corpus& corpus, const FoldPlan& plan, const CvOptions& options) {
    const std::size_t n = corpus.records.size();
    if (corpus.tokens.size() != n) throw ValidationError("cross_validate: records/tokens size mismatch");
    if (plan.assignments.size() != n) throw ValidationError("cross_validate: fold plan does not cover the corpus");
    spec.validate();
    const auto labels = labels_of(corpus.records);

    CvResult result;
    result.fold_scores.assign(plan.k, 0.0);
    result.predictions.assign(n, Label::Official);
    result.confidences.assign(n, 0.0);
    std::mutex observer_mutex;

    parallel_for(plan.k, options.threads, [&](std::size_t fold) {
        const auto train_idx = plan.train_indices(fold);
        const auto test_idx = plan.test_indices(fold);
        if (test_idx.empty()) throw ValidationError("fold " + std::to_string(fold) + " is empty");

        auto train = build_training_set(corpus, train_idx, options.augmentation, fold);
        const auto train_labels = labels_of(train.records);
        if (std::all_of(train_labels.begin(), train_labels.end(),
                        [&](Label l) { return l == train_labels.front(); })) {
            throw ValidationError("fold " + std::to_string(fold) + ": training split has a single class");
        }

        const auto model = train_model(spec, train.records, train.tokens, corpus.watchlist);
        if (options.on_fold_fitted) {
            std::lock_guard lock(observer_mutex);
            options.on_fold_fitted(fold, model.pipeline, test_idx);
        }

        std::vector<Label> truth, predicted;
        for (auto i : test_idx) {
            const auto p = model.predict(corpus.records[i], corpus.tokens[i]);
            result.predictions[i] = p.label;
            result.confidences[i] = p.confidence;
            truth.push_back(labels[i]);
            predicted.push_back(p.label);
        }
        result.fold_scores[fold] = score_of(options.metric, truth, predicted);
    });

    double sum = 0.0;
    for (double s : result.fold_scores) sum += s;
    result.mean = sum / static_cast<double>(plan.k);
    double ss = 0.0;
    for (double s : result.fold_scores) ss += (s - result.mean) * (s - result.mean);
    result.std = std::sqrt(ss / static_cast<double>(plan.k));
    return result;
}

SearchResult grid_search(const ModelSpec& base, const ParamGrid& grid, const Corpus& corpus, const FoldPlan& plan,
                         const CvOptions& options) {
    const auto candidates = grid.candidates();
    std::vector<ModelSpec> specs;
    specs.reserve(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto spec = base.with_params(candidates[c]);
        try {
            spec.validate();
        } catch (const Error& e) {
            throw ValidationError("grid candidate #" + std::to_string(c) + " " + candidates[c].dump() + ": " + e.what());
        }
        specs.push_back(std::move(spec));
    }

    SearchResult result;
    result.candidates.resize(candidates.size());
    CvOptions inner = options;
    inner.threads = 1;  // parallelism lives at the candidate level here
    inner.on_fold_fitted = nullptr;
    parallel_for(candidates.size(), options.threads, [&](std::size_t c) {
        try {
            const auto cv = cross_validate(specs[c], corpus, plan, inner);
            result.candidates[c] = {candidates[c], cv.mean, cv.std, cv.fold_scores};
        } catch (const Error& e) {
            throw ValidationError("grid candidate #" + std::to_string(c) + " " + candidates[c].dump() +
                                  " failed: " + e.what());
        }
    });

    // Replay in enumeration order so the winner never depends on scheduling.
    for (std::size_t c = 0; c < result.candidates.size(); ++c) {
        if (c == 0 || result.candidates[c].mean > result.best_score) {
            result.best_score = result.candidates[c].mean;
            result.best_index = c;
        }
    }
    result.best_params = candidates[result.best_index];

    std::vector<std::size_t> all(corpus.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto full = build_training_set(corpus, all, options.augmentation, plan.k);
    result.final_model = train_model(specs[result.best_index], full.records, full.tokens, corpus.watchlist);
    return result;
}

}  // namespace umrahguard

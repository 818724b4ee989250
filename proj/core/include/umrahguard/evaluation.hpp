#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "umrahguard/model.hpp"
#include "umrahguard/tuning.hpp"

namespace umrahguard {

/// Official is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;

    std::size_t total() const noexcept { return tp + fn + fp + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_from_predictions(std::span<const Label> truth, std::span<const Label> predicted);

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the matching ratio had a zero denominator and was reported as 0.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

/// Throws ValidationError on an empty matrix.
Metrics compute_metrics(const ConfusionMatrix& cm);

struct AblationRow {
    std::string label;
    Metrics metrics;
    double fold_std = 0.0;
};

/// The three published configurations, weakest first.
std::vector<FeatureConfig> default_ablation_configs();

/// One CV run per config over the same plan; rows follow `configs` order.
std::vector<AblationRow> run_ablation(const Corpus& corpus, const ModelSpec& spec,
                                      std::span<const FeatureConfig> configs, const FoldPlan& plan,
                                      const CvOptions& options = {});

/// Global ranking, normalized to sum to 1, sorted by descending weight
/// (ties keep column order). RF: impurity decrease; NB: |ll_U - ll_O|;
/// linear SVM: |w|. Kernel SVMs throw UnsupportedError.
std::vector<FeatureWeight> rank_feature_importance(const TrainedModel& model);

// --- reports ---------------------------------------------------------------

struct MetricsRow {
    std::string model;
    Metrics metrics;
};

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);
void write_importance_csv(std::ostream& out, std::span<const FeatureWeight> ranked);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

std::string format_metrics_table(std::span<const MetricsRow> rows);
std::string format_ablation_table(std::span<const AblationRow> rows);
std::string format_confusion_table(const ConfusionMatrix& cm);

/// Fixed six-decimal rendering used by every CSV report.
std::string format_fixed(double v);

}  // namespace umrahguard

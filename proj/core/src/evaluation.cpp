#include "umrahguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "umrahguard/errors.hpp"

namespace umrahguard {

ConfusionMatrix confusion_from_predictions(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) {
        throw ValidationError("confusion matrix: " + std::to_string(truth.size()) + " labels vs " +
                              std::to_string(predicted.size()) + " predictions");
    }
    if (truth.empty()) throw ValidationError("confusion matrix: no predictions");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool actual_pos = truth[i] == Label::Official;
        const bool pred_pos = predicted[i] == Label::Official;
        if (actual_pos && pred_pos) ++cm.tp;
        else if (actual_pos) ++cm.fn;
        else if (pred_pos) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ValidationError("compute_metrics: empty confusion matrix");
    const auto d = [](std::size_t v) { return static_cast<double>(v); };
    Metrics m;
    m.accuracy = d(cm.tp + cm.tn) / d(cm.total());
    if (cm.tp + cm.fp > 0) m.precision = d(cm.tp) / d(cm.tp + cm.fp);
    else m.precision_degenerate = true;
    if (cm.tp + cm.fn > 0) m.recall = d(cm.tp) / d(cm.tp + cm.fn);
    else m.recall_degenerate = true;
    if (!m.precision_degenerate && !m.recall_degenerate && m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1_degenerate = true;
    }
    return m;
}

std::vector<FeatureConfig> default_ablation_configs() {
    return {FeatureConfig::permissions_only(), FeatureConfig::text_only(), FeatureConfig::hybrid()};
}

std::vector<AblationRow> run_ablation(const Corpus& corpus, const ModelSpec& spec,
                                      std::span<const FeatureConfig> configs, const FoldPlan& plan,
                                      const CvOptions& options) {
    if (configs.empty()) throw ValidationError("ablation needs at least one feature configuration");
    const auto labels = labels_of(corpus.records);
    std::vector<AblationRow> rows;
    rows.reserve(configs.size());
    for (const auto& config : configs) {
        ModelSpec s = spec;
        s.features = config;
        try {
            const auto cv = cross_validate(s, corpus, plan, options);
            rows.push_back({config.label(), compute_metrics(confusion_from_predictions(labels, cv.predictions)), cv.std});
        } catch (const Error& e) {
            throw ValidationError("ablation config '" + config.label() + "': " + e.what());
        }
    }
    return rows;
}

std::vector<FeatureWeight> rank_feature_importance(const TrainedModel& model) {
    const auto names = model.pipeline.feature_names();
    const auto raw = std::visit(
        [&](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NBModel>) {
                std::vector<double> w(m.log_likelihood[0].size());
                for (std::size_t j = 0; j < w.size(); ++j) {
                    w[j] = std::abs(m.log_likelihood[1][j] - m.log_likelihood[0][j]);
                }
                return w;
            } else if constexpr (std::is_same_v<T, RFModel>) {
                return rf_feature_importance(m);
            } else {
                if (m.kernel.kind != KernelKind::Linear) {
                    throw UnsupportedError("feature importance is not defined for a " +
                                           std::string(kernel_name(m.kernel.kind)) +
                                           " kernel SVM; use a linear kernel, RF or NB");
                }
                std::vector<double> w(m.dim, 0.0);
                for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
                    for (const auto& e : m.support_vectors[s].entries) w[e.index] += m.dual_coefs[s] * e.value;
                }
                for (auto& v : w) v = std::abs(v);
                return w;
            }
        },
        model.classifier);
    if (raw.size() != names.size()) throw ValidationError("importance: model width does not match pipeline");

    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
    std::vector<FeatureWeight> out;
    out.reserve(order.size());
    for (auto j : order) out.push_back({names[j], total > 0.0 ? raw[j] / total : 0.0});
    return out;
}

// --- reports ---------------------------------------------------------------

std::string format_fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

namespace {

// RFC 4180 quoting, only when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return buf;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& body) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : body) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == 0) {
                out << cells[c] << std::string(width[c] - cells[c].size(), ' ');
            } else {
                out << "  " << std::string(width[c] - cells[c].size(), ' ') << cells[c];
            }
        }
        out << '\n';
    };
    line(header);
    std::size_t rule = 0;
    for (auto w : width) rule += w + 2;
    out << std::string(rule - 2, '-') << '\n';
    for (const auto& row : body) line(row);
    return out.str();
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
    out << "model,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
        out << csv_field(r.model) << ',' << format_fixed(r.metrics.accuracy) << ',' << format_fixed(r.metrics.precision)
            << ',' << format_fixed(r.metrics.recall) << ',' << format_fixed(r.metrics.f1) << '\n';
    }
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
    out << "features,accuracy,precision,recall,f1,fold_std\n";
    for (const auto& r : rows) {
        out << csv_field(r.label) << ',' << format_fixed(r.metrics.accuracy) << ','
            << format_fixed(r.metrics.precision) << ',' << format_fixed(r.metrics.recall) << ','
            << format_fixed(r.metrics.f1) << ',' << format_fixed(r.fold_std) << '\n';
    }
}

void write_importance_csv(std::ostream& out, std::span<const FeatureWeight> ranked) {
    out << "rank,feature,weight\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out << (i + 1) << ',' << csv_field(ranked[i].name) << ',' << format_fixed(ranked[i].weight) << '\n';
    }
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "actual,predicted_official,predicted_unofficial\n";
    out << "official," << cm.tp << ',' << cm.fn << '\n';
    out << "unofficial," << cm.fp << ',' << cm.tn << '\n';
}

std::string format_metrics_table(std::span<const MetricsRow> rows) {
    std::vector<std::vector<std::string>> body;
    for (const auto& r : rows) {
        body.push_back({r.model, pct(r.metrics.accuracy), pct(r.metrics.precision), pct(r.metrics.recall),
                        pct(r.metrics.f1)});
    }
    return render_table({"Model", "Accuracy", "Precision", "Recall", "F1-Score"}, body);
}

std::string format_ablation_table(std::span<const AblationRow> rows) {
    std::vector<std::vector<std::string>> body;
    for (const auto& r : rows) {
        body.push_back({r.label, pct(r.metrics.accuracy), pct(r.metrics.precision), pct(r.metrics.recall)});
    }
    return render_table({"Feature Configuration", "Accuracy", "Precision", "Recall"}, body);
}

std::string format_confusion_table(const ConfusionMatrix& cm) {
    return render_table({"", "Predicted Official", "Predicted Unofficial"},
                        {{"Actual Official", std::to_string(cm.tp) + " (TP)", std::to_string(cm.fn) + " (FN)"},
                         {"Actual Unofficial", std::to_string(cm.fp) + " (FP)", std::to_string(cm.tn) + " (TN)"}});
}

}  // namespace umrahguard

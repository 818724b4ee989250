#include <doctest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "umrahguard/errors.hpp"
#include "umrahguard/evaluation.hpp"

using namespace umrahguard;

namespace {

// Plain textbook formulas, written out separately from the library.
struct Expected {
    double acc, prec, rec, f1;
};

Expected by_hand(double tp, double fn, double fp, double tn) {
    const double p = tp / (tp + fp);
    const double r = tp / (tp + fn);
    return {(tp + tn) / (tp + fn + fp + tn), p, r, 2.0 * p * r / (p + r)};
}

}  // namespace

TEST_CASE("metrics for a 92/8/7/93 matrix") {
    const ConfusionMatrix cm{92, 8, 7, 93};
    const auto m = compute_metrics(cm);
    const auto e = by_hand(92, 8, 7, 93);
    CHECK(m.accuracy == doctest::Approx(0.925).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.929293).epsilon(1e-6));
    CHECK(m.recall == doctest::Approx(0.92).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(0.924623).epsilon(1e-6));
    CHECK(m.precision == doctest::Approx(e.prec).epsilon(1e-14));
    CHECK(m.f1 == doctest::Approx(e.f1).epsilon(1e-14));
    CHECK_FALSE(m.precision_degenerate);
}

TEST_CASE("f1 is the harmonic mean of precision and recall") {
    for (auto cm : {ConfusionMatrix{5, 3, 2, 9}, ConfusionMatrix{50, 1, 20, 3}, ConfusionMatrix{1, 9, 9, 1}}) {
        const auto m = compute_metrics(cm);
        CHECK(m.f1 == doctest::Approx(2.0 / (1.0 / m.precision + 1.0 / m.recall)).epsilon(1e-12));
        CHECK(m.accuracy >= 0.0);
        CHECK(m.accuracy <= 1.0);
    }
}

TEST_CASE("perfect predictions") {
    const std::vector<Label> y{Label::Official, Label::Unofficial, Label::Official, Label::Unofficial};
    const auto cm = confusion_from_predictions(y, y);
    CHECK(cm == ConfusionMatrix{2, 0, 0, 2});
    const auto m = compute_metrics(cm);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
}

TEST_CASE("swapping the labels swaps the matrix") {
    const std::vector<Label> truth{Label::Official, Label::Official, Label::Unofficial, Label::Unofficial, Label::Official};
    const std::vector<Label> pred{Label::Official, Label::Unofficial, Label::Official, Label::Unofficial, Label::Official};
    auto flip = [](std::vector<Label> v) {
        for (auto& l : v) l = l == Label::Official ? Label::Unofficial : Label::Official;
        return v;
    };
    const auto a = confusion_from_predictions(truth, pred);
    const auto b = confusion_from_predictions(flip(truth), flip(pred));
    CHECK(a.tp == b.tn);
    CHECK(a.tn == b.tp);
    CHECK(a.fp == b.fn);
    CHECK(a.fn == b.fp);
    CHECK(compute_metrics(a).accuracy == compute_metrics(b).accuracy);
}

TEST_CASE("degenerate ratios are zero and flagged") {
    // Nothing predicted Official.
    const auto none = compute_metrics(ConfusionMatrix{0, 5, 0, 5});
    CHECK(none.precision == 0.0);
    CHECK(none.precision_degenerate);
    CHECK(none.recall == 0.0);
    CHECK_FALSE(none.recall_degenerate);
    CHECK(none.f1 == 0.0);
    CHECK(none.f1_degenerate);

    // No Official samples at all.
    const auto no_pos = compute_metrics(ConfusionMatrix{0, 0, 3, 7});
    CHECK(no_pos.recall_degenerate);
    CHECK(no_pos.accuracy == 0.7);

    CHECK_THROWS_AS(compute_metrics(ConfusionMatrix{}), ValidationError);
}

TEST_CASE("confusion input validation") {
    const std::vector<Label> a{Label::Official};
    const std::vector<Label> b{Label::Official, Label::Unofficial};
    CHECK_THROWS_AS(confusion_from_predictions(a, b), ValidationError);
    CHECK_THROWS_AS(confusion_from_predictions(std::vector<Label>{}, std::vector<Label>{}), ValidationError);
}

TEST_CASE("ablation rows follow config order and reuse the plan") {
    const auto& c = umrahguard::testing::reference_corpus();
    const auto plan = stratified_k_fold(labels_of(c.records), 5, 42);
    const auto spec = ModelSpec::reference(ModelType::NaiveBayes);
    const auto configs = default_ablation_configs();
    const auto rows = run_ablation(c.view(), spec, configs, plan);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "Metadata-Only");
    CHECK(rows[1].label == "Text-Only");
    CHECK(rows[2].label == "Hybrid");

    // The same config twice gives identical rows.
    const std::vector<FeatureConfig> twice{FeatureConfig::hybrid(), FeatureConfig::hybrid()};
    const auto dup = run_ablation(c.view(), spec, twice, plan);
    CHECK(dup[0].metrics.accuracy == dup[1].metrics.accuracy);
    CHECK(dup[0].fold_std == dup[1].fold_std);
    CHECK(dup[0].metrics.accuracy == rows[2].metrics.accuracy);

    // Pooled accuracy equals a CV run scored by hand.
    auto hybrid = spec;
    hybrid.features = FeatureConfig::hybrid();
    const auto cv = cross_validate(hybrid, c.view(), plan);
    const auto cm = confusion_from_predictions(labels_of(c.records), cv.predictions);
    CHECK(rows[2].metrics.accuracy == compute_metrics(cm).accuracy);
}

TEST_CASE("importance rankings") {
    const auto& c = umrahguard::testing::reference_corpus();
    for (auto type : {ModelType::NaiveBayes, ModelType::RandomForest}) {
        auto spec = ModelSpec::reference(type, 42);
        if (type == ModelType::RandomForest) spec = spec.with_params({{"n_estimators", 30}});
        const auto model = train_model(spec, c.records, c.tokens, c.watchlist);
        const auto ranked = rank_feature_importance(model);
        CHECK(ranked.size() == model.pipeline.width());
        double total = 0;
        for (const auto& f : ranked) total += f.weight;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t k = 1; k < ranked.size(); ++k) CHECK(ranked[k - 1].weight >= ranked[k].weight);
    }

    auto linear = ModelSpec::reference(ModelType::Svm).with_params({{"kernel", "linear"}});
    const auto lin = train_model(linear, c.records, c.tokens, c.watchlist);
    CHECK(rank_feature_importance(lin).size() == lin.pipeline.width());

    const auto rbf = train_model(ModelSpec::reference(ModelType::Svm), c.records, c.tokens, c.watchlist);
    CHECK_THROWS_AS(rank_feature_importance(rbf), UnsupportedError);
}

TEST_CASE("forest importance finds the only informative permission") {
    using umrahguard::testing::make_record;
    std::vector<AppRecord> records;
    std::vector<TokenDoc> tokens;
    for (int i = 0; i < 40; ++i) {
        const bool u = i % 2 == 1;
        std::set<std::string> perms{"INTERNET"};
        if (u) perms.insert("READ_SMS");
        records.push_back(make_record("p" + std::to_string(i), "paket umrah", perms, u ? Label::Unofficial : Label::Official));
        tokens.push_back({"paket", "umrah"});
    }
    const std::vector<std::string> watch{"READ_CONTACTS", "READ_SMS", "CAMERA"};
    auto spec = ModelSpec::reference(ModelType::RandomForest, 3).with_params({{"n_estimators", 10}});
    spec.features = FeatureConfig::permissions_only();
    const auto model = train_model(spec, records, tokens, watch);
    const auto ranked = rank_feature_importance(model);
    REQUIRE_FALSE(ranked.empty());
    CHECK(ranked.front().name == "READ_SMS");
    CHECK(ranked.front().weight == doctest::Approx(1.0));
}

TEST_CASE("csv reports") {
    const auto m = compute_metrics(ConfusionMatrix{92, 8, 7, 93});
    std::ostringstream metrics;
    const std::vector<MetricsRow> rows{{"svm", m}};
    write_metrics_csv(metrics, rows);
    CHECK(metrics.str() == "model,accuracy,precision,recall,f1\nsvm,0.925000,0.929293,0.920000,0.924623\n");

    std::ostringstream ablation;
    const std::vector<AblationRow> arows{{"Hybrid", m, 0.0125}};
    write_ablation_csv(ablation, arows);
    CHECK(ablation.str() ==
          "features,accuracy,precision,recall,f1,fold_std\nHybrid,0.925000,0.929293,0.920000,0.924623,0.012500\n");

    std::ostringstream importance;
    const std::vector<FeatureWeight> ranked{{"resmi", 0.75}, {"READ_SMS", 0.25}};
    write_importance_csv(importance, ranked);
    CHECK(importance.str() == "rank,feature,weight\n1,resmi,0.750000\n2,READ_SMS,0.250000\n");

    CHECK(format_fixed(1.0 / 3.0) == "0.333333");
    CHECK(format_metrics_table(rows).find("92.50") != std::string::npos);
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "support/fixtures.hpp"
#include "umrahguard/errors.hpp"
#include "umrahguard/model.hpp"

using namespace umrahguard;

namespace {

TrainedModel train_reference(ModelType type, FeatureConfig features = FeatureConfig::hybrid()) {
    const auto& c = umrahguard::testing::reference_corpus();
    auto spec = ModelSpec::reference(type, 42);
    if (type == ModelType::RandomForest) spec = spec.with_params({{"n_estimators", 25}});
    spec.features = features;
    return train_model(spec, c.records, c.tokens, c.watchlist);
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("round trip keeps predictions bit-identical") {
    const auto& c = umrahguard::testing::reference_corpus();
    for (auto type : {ModelType::NaiveBayes, ModelType::RandomForest, ModelType::Svm}) {
        CAPTURE(model_type_name(type));
        const auto model = train_reference(type);
        const auto text = serialize_model(model);
        const auto back = parse_model(text);
        CHECK(serialize_model(back) == text);
        for (std::size_t i = 0; i < c.records.size(); ++i) {
            const auto a = model.predict(c.records[i], c.tokens[i]);
            const auto b = back.predict(c.records[i], c.tokens[i]);
            CHECK(a.label == b.label);
            CHECK(a.confidence == b.confidence);
            CHECK(a.score == b.score);
        }
    }
}

TEST_CASE("round trip through a file") {
    const auto model = train_reference(ModelType::NaiveBayes, FeatureConfig::text_only());
    const auto path = std::filesystem::temp_directory_path() / "umrahguard-model-test.json";
    save_model(model, path);
    const auto back = load_model(path);
    std::filesystem::remove(path);
    CHECK(back.pipeline.config == FeatureConfig::text_only());
    CHECK(back.pipeline.tfidf.terms == model.pipeline.tfidf.terms);
    CHECK(back.spec.params == model.spec.params);
}

TEST_CASE("truncated or edited files fail the checksum") {
    const auto text = serialize_model(train_reference(ModelType::NaiveBayes));
    for (std::size_t cut : {text.size() / 2, text.size() - 20, std::size_t{10}}) {
        try {
            parse_model(text.substr(0, cut));
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind() == ModelFileError::Kind::Checksum);
        }
    }
    const auto tampered = replace_first(text, "\"alpha\":0.5", "\"alpha\":0.6");
    try {
        parse_model(tampered);
        FAIL("expected ModelFileError");
    } catch (const ModelFileError& e) {
        CHECK(e.kind() == ModelFileError::Kind::Checksum);
    }
}

TEST_CASE("future versions are rejected explicitly") {
    const auto text = serialize_model(train_reference(ModelType::NaiveBayes));
    const auto future = replace_first(text, "umrahguard-model/1", "umrahguard-model/2");
    try {
        parse_model(future);
        FAIL("expected ModelFileError");
    } catch (const ModelFileError& e) {
        CHECK(e.kind() == ModelFileError::Kind::UnsupportedVersion);
    }
}

TEST_CASE("missing file is an I/O error") {
    try {
        load_model("/nonexistent/model.json");
        FAIL("expected ModelFileError");
    } catch (const ModelFileError& e) {
        CHECK(e.kind() == ModelFileError::Kind::Io);
    }
}

TEST_CASE("explanations are normalized and name real features") {
    const auto& c = umrahguard::testing::reference_corpus();
    for (auto type : {ModelType::NaiveBayes, ModelType::RandomForest, ModelType::Svm}) {
        CAPTURE(model_type_name(type));
        const auto model = train_reference(type);
        const auto names = model.pipeline.feature_names();
        const auto x = model.featurize(c.records[150], c.tokens[150]);
        const auto all = explain(model, x, 1000);
        CHECK(all.size() == x.entries.size());
        double total = 0;
        for (const auto& f : all) {
            total += f.weight;
            CHECK(std::find(names.begin(), names.end(), f.name) != names.end());
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t k = 1; k < all.size(); ++k) CHECK(all[k - 1].weight >= all[k].weight);
        CHECK(explain(model, x, 3).size() == 3);
    }
}

TEST_CASE("labels_of requires labels") {
    auto r = umrahguard::testing::make_record("A", "umrah");
    CHECK_THROWS_AS(labels_of(std::vector<AppRecord>{r}), ValidationError);
}

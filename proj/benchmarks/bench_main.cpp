#include <benchmark/benchmark.h>

#include "umrahguard/corpus.hpp"
#include "umrahguard/features.hpp"
#include "umrahguard/model.hpp"
#include "umrahguard/svm.hpp"
#include "umrahguard/textprep.hpp"

using namespace umrahguard;

namespace {

struct Fixture {
    TextResources resources = TextResources::load(default_data_dir());
    std::vector<AppRecord> records;
    std::vector<TokenDoc> tokens;
    std::vector<std::string> watchlist;

    Fixture() {
        const auto cfg = GeneratorConfig::reference(42);
        records = generate_synthetic(cfg);
        for (const auto& r : records) tokens.push_back(preprocess_text(r.description, resources));
        watchlist = cfg.watchlist;
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_Preprocess(benchmark::State& state) {
    const auto& f = fixture();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(preprocess_text(f.records[i++ % f.records.size()].description, f.resources));
    }
}
BENCHMARK(BM_Preprocess);

void BM_TfidfFit(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(fit_tfidf(f.tokens));
}
BENCHMARK(BM_TfidfFit);

void BM_SmoTrain(benchmark::State& state) {
    const auto& f = fixture();
    const auto p = FeaturePipeline::fit(f.records, f.tokens, f.watchlist, FeatureConfig::hybrid());
    std::vector<SparseVector> X;
    for (std::size_t i = 0; i < f.records.size(); ++i) X.push_back(assemble_features(f.records[i], f.tokens[i], p).flatten());
    const auto y = labels_of(f.records);
    for (auto _ : state) benchmark::DoNotOptimize(train_svm_smo(X, y, 10.0, KernelSpec::rbf(0.1)));
}
BENCHMARK(BM_SmoTrain)->Unit(benchmark::kMillisecond);

void BM_PredictRecord(benchmark::State& state) {
    const auto& f = fixture();
    const auto model = train_model(ModelSpec::reference(ModelType::Svm, 42), f.records, f.tokens, f.watchlist);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = f.records[i++ % f.records.size()];
        benchmark::DoNotOptimize(model.predict(r, preprocess_text(r.description, f.resources)));
    }
}
BENCHMARK(BM_PredictRecord)->Unit(benchmark::kMicrosecond);

}  // namespace

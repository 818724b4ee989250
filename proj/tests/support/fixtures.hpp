#pragma once

#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/features.hpp"
#include "umrahguard/textprep.hpp"
#include "umrahguard/tuning.hpp"

namespace umrahguard::testing {

inline const TextResources& resources() {
    static const TextResources res = TextResources::load(default_data_dir());
    return res;
}

/// The seed-42, 100/100 generated dataset, preprocessed once per binary.
struct ReferenceCorpus {
    std::vector<AppRecord> records;
    std::vector<TokenDoc> tokens;
    std::vector<std::string> watchlist;

    Corpus view() const { return {records, tokens, watchlist, &resources()}; }
};

inline const ReferenceCorpus& reference_corpus() {
    static const ReferenceCorpus corpus = [] {
        ReferenceCorpus c;
        const auto cfg = GeneratorConfig::reference(42);
        c.records = generate_synthetic(cfg);
        for (const auto& r : c.records) c.tokens.push_back(preprocess_text(r.description, resources()));
        c.watchlist = cfg.watchlist;
        return c;
    }();
    return corpus;
}

inline AppRecord make_record(std::string id, std::string description, std::set<std::string> permissions = {"INTERNET"},
                             std::optional<Label> label = std::nullopt) {
    AppRecord r;
    r.app_id = std::move(id);
    r.name = "App " + r.app_id;
    r.developer_name = "Dev " + r.app_id;
    r.developer_email_domain = "example.co.id";
    r.description = std::move(description);
    r.permissions = std::move(permissions);
    r.download_count = 1000;
    r.rating = 4.0;
    r.size_mb = 20.0;
    r.days_since_update = 30;
    r.label = label;
    return r;
}

}  // namespace umrahguard::testing

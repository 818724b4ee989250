#include "umrahguard/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "umrahguard/errors.hpp"

namespace umrahguard {

std::optional<std::uint32_t> TfIdfModel::lookup(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void TfIdfModel::reindex() {
    index_.clear();
    index_.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) index_.emplace(terms[i], static_cast<std::uint32_t>(i));
}

TfIdfModel fit_tfidf(std::span<const TokenDoc> docs) {
    if (docs.empty()) throw ValidationError("fit_tfidf: corpus has no documents");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::set<std::string_view> distinct(doc.begin(), doc.end());
        for (auto t : distinct) ++df[std::string(t)];
    }
    if (df.empty()) throw ValidationError("fit_tfidf: every document is empty");

    TfIdfModel m;
    m.n_documents = docs.size();
    const auto n = static_cast<double>(m.n_documents);
    for (const auto& [term, count] : df) {
        m.terms.push_back(term);
        m.document_frequency.push_back(count);
        m.idf.push_back(std::log(n / static_cast<double>(count)));
    }
    m.reindex();
    return m;
}

std::vector<SparseEntry> transform_tfidf(const TfIdfModel& model, const TokenDoc& tokens) {
    std::vector<SparseEntry> out;
    if (tokens.empty()) return out;
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& t : tokens) {
        if (auto idx = model.lookup(t)) ++counts[*idx];
    }
    const auto length = static_cast<double>(tokens.size());
    for (const auto& [idx, count] : counts) {
        const double w = static_cast<double>(count) / length * model.idf[idx];
        if (w != 0.0) out.push_back({idx, w});
    }
    return out;
}

std::vector<double> encode_permissions(const std::set<std::string>& permissions,
                                       const std::vector<std::string>& watchlist) {
    if (watchlist.empty()) throw ValidationError("encode_permissions: watchlist is empty");
    std::vector<double> out(watchlist.size(), 0.0);
    for (std::size_t k = 0; k < watchlist.size(); ++k) {
        if (permissions.contains(watchlist[k])) out[k] = 1.0;
    }
    return out;
}

std::array<double, kMetaFeatureCount> raw_metadata(const AppRecord& r) {
    return {static_cast<double>(r.download_count), r.rating, r.size_mb, static_cast<double>(r.days_since_update),
            static_cast<double>(r.permissions.size())};
}

MetadataStats MetadataStats::fit(std::span<const AppRecord> records) {
    if (records.empty()) throw ValidationError("MetadataStats::fit: no training records");
    MetadataStats s;
    s.min.fill(std::numeric_limits<double>::infinity());
    s.max.fill(-std::numeric_limits<double>::infinity());
    s.mean.fill(0.0);
    for (const auto& r : records) {
        const auto v = raw_metadata(r);
        for (std::size_t f = 0; f < kMetaFeatureCount; ++f) {
            s.min[f] = std::min(s.min[f], v[f]);
            s.max[f] = std::max(s.max[f], v[f]);
            s.mean[f] += v[f];
        }
    }
    for (auto& m : s.mean) m /= static_cast<double>(records.size());
    return s;
}

std::vector<double> scale_metadata(const AppRecord& record, const MetadataStats& stats) {
    const auto v = raw_metadata(record);
    std::vector<double> out(kMetaFeatureCount);
    for (std::size_t f = 0; f < kMetaFeatureCount; ++f) {
        const double range = stats.max[f] - stats.min[f];
        out[f] = range > 0.0 ? std::clamp((v[f] - stats.min[f]) / range, 0.0, 1.0) : 0.5;
    }
    return out;
}

void FeatureConfig::validate() const {
    if (!use_text && !use_permissions && !use_metadata) {
        throw ValidationError("feature config must enable at least one block");
    }
}

std::string FeatureConfig::label() const {
    if (*this == hybrid()) return "Hybrid";
    if (*this == text_only()) return "Text-Only";
    if (*this == permissions_only()) return "Metadata-Only";
    std::string out;
    for (auto [on, name] : {std::pair{use_text, "text"}, {use_permissions, "permissions"}, {use_metadata, "metadata"}}) {
        if (!on) continue;
        if (!out.empty()) out += '+';
        out += name;
    }
    return out;
}

SparseVector FeatureVector::flatten() const {
    SparseVector v;
    v.dim = block_map.total();
    v.entries.reserve(text_block.size() + perm_block.size() + meta_block.size());
    for (const auto& e : text_block) {
        v.entries.push_back({static_cast<std::uint32_t>(block_map.text_offset + e.index), e.value});
    }
    for (std::size_t k = 0; k < perm_block.size(); ++k) {
        if (perm_block[k] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(block_map.perm_offset + k), perm_block[k]});
    }
    for (std::size_t k = 0; k < meta_block.size(); ++k) {
        if (meta_block[k] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(block_map.meta_offset + k), meta_block[k]});
    }
    return v;
}

FeaturePipeline FeaturePipeline::fit(std::span<const AppRecord> records, std::span<const TokenDoc> token_docs,
                                     std::vector<std::string> watchlist, FeatureConfig config) {
    config.validate();
    if (records.size() != token_docs.size()) throw ValidationError("FeaturePipeline::fit: records/tokens size mismatch");
    if (watchlist.empty()) throw ValidationError("FeaturePipeline::fit: watchlist is empty");
    FeaturePipeline p;
    if (config.use_text) p.tfidf = fit_tfidf(token_docs);
    p.watchlist = std::move(watchlist);
    p.meta_stats = MetadataStats::fit(records);
    p.config = config;
    return p;
}

BlockMap FeaturePipeline::block_map_for(const FeatureConfig& cfg) const {
    BlockMap m;
    m.text_width = cfg.use_text ? tfidf.size() : 0;
    m.perm_offset = m.text_width;
    m.perm_width = cfg.use_permissions ? watchlist.size() : 0;
    m.meta_offset = m.perm_offset + m.perm_width;
    m.meta_width = cfg.use_metadata ? kMetaFeatureCount : 0;
    return m;
}

std::vector<std::string> FeaturePipeline::feature_names() const {
    std::vector<std::string> names;
    if (config.use_text) names.insert(names.end(), tfidf.terms.begin(), tfidf.terms.end());
    if (config.use_permissions) names.insert(names.end(), watchlist.begin(), watchlist.end());
    if (config.use_metadata) {
        for (auto n : kMetaFeatureNames) names.emplace_back(n);
    }
    return names;
}

FeatureVector assemble_features(const AppRecord& record, const TokenDoc& tokens, const FeaturePipeline& pipeline,
                                const FeatureConfig& config) {
    config.validate();
    if (config.use_text && !pipeline.config.use_text) {
        throw ValidationError("assemble_features: pipeline was fitted without a text vocabulary");
    }
    FeatureVector v;
    v.block_map = pipeline.block_map_for(config);
    if (config.use_text) v.text_block = transform_tfidf(pipeline.tfidf, tokens);
    if (config.use_permissions) v.perm_block = encode_permissions(record.permissions, pipeline.watchlist);
    if (config.use_metadata) v.meta_block = scale_metadata(record, pipeline.meta_stats);
    return v;
}

}  // namespace umrahguard

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/sparse.hpp"

namespace umrahguard {

using TokenDoc = std::vector<std::string>;

/// Fitted TF-IDF vocabulary. Terms are indexed in lexicographic order and
/// idf[t] = ln(N / df[t]) with no smoothing.
struct TfIdfModel {
    std::vector<std::string> terms;
    std::vector<std::size_t> document_frequency;
    std::vector<double> idf;
    std::size_t n_documents = 0;

    std::size_t size() const noexcept { return terms.size(); }
    std::optional<std::uint32_t> lookup(std::string_view term) const;

    /// Rebuilds the term index; call after filling `terms` by hand.
    void reindex();

private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Throws ValidationError when every document is empty.
TfIdfModel fit_tfidf(std::span<const TokenDoc> docs);

/// TF is count / document length (out-of-vocabulary tokens included in the
/// length); entries are sorted by index and zero weights are kept out.
std::vector<SparseEntry> transform_tfidf(const TfIdfModel& model, const TokenDoc& tokens);

/// Slot k is 1 iff watchlist[k] is requested.
std::vector<double> encode_permissions(const std::set<std::string>& permissions,
                                       const std::vector<std::string>& watchlist);

inline constexpr std::size_t kMetaFeatureCount = 5;
inline constexpr std::array<std::string_view, kMetaFeatureCount> kMetaFeatureNames{
    "download_count", "rating", "size_mb", "days_since_update", "permission_count"};

std::array<double, kMetaFeatureCount> raw_metadata(const AppRecord& record);

/// Training-split min, max and mean for each metadata feature.
struct MetadataStats {
    std::array<double, kMetaFeatureCount> min{};
    std::array<double, kMetaFeatureCount> max{};
    std::array<double, kMetaFeatureCount> mean{};

    static MetadataStats fit(std::span<const AppRecord> records);
};

/// Min-max scaling clamped to [0, 1]; a constant feature maps to 0.5.
std::vector<double> scale_metadata(const AppRecord& record, const MetadataStats& stats);

struct FeatureConfig {
    bool use_text = true;
    bool use_permissions = true;
    bool use_metadata = true;

    static FeatureConfig hybrid() { return {true, true, true}; }
    static FeatureConfig text_only() { return {true, false, false}; }
    static FeatureConfig permissions_only() { return {false, true, false}; }

    void validate() const;  // at least one block enabled
    std::string label() const;
    bool operator==(const FeatureConfig&) const = default;
};

struct BlockMap {
    std::size_t text_offset = 0, text_width = 0;
    std::size_t perm_offset = 0, perm_width = 0;
    std::size_t meta_offset = 0, meta_width = 0;

    std::size_t total() const noexcept { return text_width + perm_width + meta_width; }
};

struct FeatureVector {
    std::vector<SparseEntry> text_block;
    std::vector<double> perm_block;
    std::vector<double> meta_block;
    BlockMap block_map;

    /// Concatenation text -> permissions -> metadata as one sparse row.
    SparseVector flatten() const;
};

/// Everything fitted on the training split that is needed to featurize a
/// record: vocabulary, watchlist and metadata ranges.
struct FeaturePipeline {
    TfIdfModel tfidf;
    std::vector<std::string> watchlist;
    MetadataStats meta_stats;
    FeatureConfig config;

    /// `token_docs[i]` must be the preprocessed description of `records[i]`.
    static FeaturePipeline fit(std::span<const AppRecord> records, std::span<const TokenDoc> token_docs,
                               std::vector<std::string> watchlist, FeatureConfig config);

    BlockMap block_map() const { return block_map_for(config); }
    BlockMap block_map_for(const FeatureConfig& cfg) const;
    std::size_t width() const { return block_map().total(); }

    /// Human-readable name per flattened column.
    std::vector<std::string> feature_names() const;
};

FeatureVector assemble_features(const AppRecord& record, const TokenDoc& tokens, const FeaturePipeline& pipeline,
                                const FeatureConfig& config);

inline FeatureVector assemble_features(const AppRecord& record, const TokenDoc& tokens,
                                       const FeaturePipeline& pipeline) {
    return assemble_features(record, tokens, pipeline, pipeline.config);
}

}  // namespace umrahguard

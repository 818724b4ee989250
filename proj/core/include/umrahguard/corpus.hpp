#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace umrahguard {

/// Class label. Official is the positive class for precision and recall.
enum class Label : int { Official = 0, Unofficial = 1 };

constexpr int label_index(Label l) noexcept { return static_cast<int>(l); }
std::string_view label_name(Label l) noexcept;  // "official" / "unofficial"

struct AppRecord {
    std::string app_id;
    std::string name;
    std::string developer_name;
    std::string developer_email_domain;
    std::string description;
    std::set<std::string> permissions;
    std::uint64_t download_count = 0;
    double rating = 0.0;
    double size_mb = 1.0;
    std::uint64_t days_since_update = 0;
    std::optional<Label> label;

    bool operator==(const AppRecord&) const = default;
};

/// True iff `id` matches [A-Z][A-Z0-9_]*.
bool is_valid_permission(std::string_view id) noexcept;

/// Local snapshot of the licensing registry used for labeling.
struct RegistrySnapshot {
    std::set<std::string> registered_names;  // normalized
    std::set<std::string> free_email_domains;
    /// Watchlist order defines the permission-vector slot order.
    std::vector<std::string> high_risk_permissions;
};

/// Default watchlist: READ_PHONE_STATE, ACCESS_FINE_LOCATION, READ_CONTACTS,
/// READ_SMS, RECORD_AUDIO.
const std::vector<std::string>& default_watchlist();
const std::set<std::string>& default_free_email_domains();

/// Case-fold, strip punctuation, collapse whitespace.
std::string normalize_agency_name(std::string_view name);

RegistrySnapshot load_registry(const std::filesystem::path& path);
void save_registry(const RegistrySnapshot& registry, const std::filesystem::path& path);

// --- dataset I/O -----------------------------------------------------------

/// Parses one JSON-lines dataset. Throws ParseError (line + field) on a
/// malformed line and ValidationError on duplicate app_id.
std::vector<AppRecord> load_dataset(const std::filesystem::path& path);
std::vector<AppRecord> parse_dataset(std::string_view jsonl);

std::string record_to_json_line(const AppRecord& record);
void save_dataset(const std::vector<AppRecord>& records, const std::filesystem::path& path);

/// Drops records duplicating an earlier (lowercased name, developer_name)
/// and records whose description is blank. Order preserved.
std::vector<AppRecord> clean_dataset(const std::vector<AppRecord>& records);

// --- labeling --------------------------------------------------------------

enum class LabelReason { NotRegistered, FreeEmail, RiskyPermissions };
std::string_view reason_name(LabelReason r) noexcept;

struct LabelDecision {
    Label label = Label::Unofficial;
    std::vector<LabelReason> rationale;  // empty when Official
};

/// Registration is necessary and sufficient for Official; the other
/// criteria only populate the rationale of an Unofficial decision.
LabelDecision apply_labeling_criteria(const AppRecord& record, const RegistrySnapshot& registry);

// --- synthetic data --------------------------------------------------------

struct WeightedTerm {
    std::string term;
    double weight = 1.0;
};

struct GeneratorConfig {
    std::uint64_t seed = 42;
    std::size_t n_official = 100;
    std::size_t n_unofficial = 100;
    std::vector<WeightedTerm> official_vocab;
    std::vector<WeightedTerm> unofficial_vocab;
    std::vector<WeightedTerm> shared_vocab;
    double p_highrisk_official = 0.15;
    double p_highrisk_unofficial = 0.85;
    std::size_t min_description_tokens = 8;
    std::size_t max_description_tokens = 30;
    /// Probability that a class-vocabulary draw comes from the other class.
    double noise_rate = 0.2;
    std::vector<std::string> watchlist = default_watchlist();

    /// Reference configuration with the built-in vocabulary pools.
    static GeneratorConfig reference(std::uint64_t seed = 42);
    void validate() const;  // throws ValidationError
};

/// Deterministic for a fixed config; official records first, then unofficial.
std::vector<AppRecord> generate_synthetic(const GeneratorConfig& config);

/// Registry consistent with generate_synthetic's official developers.
RegistrySnapshot synthetic_registry(const GeneratorConfig& config);

// --- augmentation ----------------------------------------------------------

struct SynonymMap {
    std::map<std::string, std::vector<std::string>> entries;

    static SynonymMap load(const std::filesystem::path& path);  // JSON object
    void validate() const;
};

/// Returns the originals followed by `copies` augmented copies of each
/// record. Eligible tokens (in map, not stopwords) are replaced with a
/// seeded-random synonym with probability `rate`.
std::vector<AppRecord> augment_synonyms(const std::vector<AppRecord>& records, const SynonymMap& map,
                                        double rate, std::uint64_t seed,
                                        const std::set<std::string>& stoplist, std::size_t copies = 1);

/// Single-record rewrite used by augment_synonyms; exposed for testing.
std::string replace_synonyms(std::string_view description, const SynonymMap& map, double rate,
                             std::uint64_t seed, const std::set<std::string>& stoplist);

}  // namespace umrahguard

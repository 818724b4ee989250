#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace umrahguard {

/// ASCII lowercase; other bytes pass through.
std::string fold_case(std::string_view text);

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Byte ranges of the tokens `tokenize` would return, in order.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

/// Splits on every non-alphanumeric byte, dropping tokens shorter than two
/// characters and purely numeric tokens. Does not fold case.
std::vector<std::string> tokenize(std::string_view text);

struct Stoplist {
    std::unordered_set<std::string> words;

    bool contains(std::string_view w) const { return words.contains(std::string(w)); }
};

/// Ordered affix-stripping rule set for Indonesian.
///
/// Suffixes are removed in three layers (particle: -lah -kah -pun; possessive:
/// -nya -ku -mu; derivational: -kan -an -i), the dictionary being consulted
/// after each removal. Prefixes are then peeled off the most-stripped form
/// first, up to three deep, with recoding for nasal assimilation
/// (meny+V -> s+V, mem+V -> p+V, men+V -> t+V, meng+V -> k+V, and the pe-
/// counterparts). The first dictionary hit wins; otherwise the token is
/// returned unchanged.
struct StemmerRules {
    struct PrefixRule {
        std::string prefix;
        /// Characters the remainder must start with; empty means any.
        std::string next_chars;
        /// Replacement prepended to the remainder (recoding), may be empty.
        std::string recode;
    };

    std::unordered_set<std::string> root_dictionary;
    std::vector<std::string> particle_suffixes{"lah", "kah", "pun"};
    std::vector<std::string> possessive_suffixes{"nya", "ku", "mu"};
    std::vector<std::string> derivational_suffixes{"kan", "an", "i"};
    std::vector<PrefixRule> prefixes = default_prefix_rules();
    std::size_t max_prefix_depth = 3;

    static std::vector<PrefixRule> default_prefix_rules();
};

std::string stem_token(std::string_view token, const StemmerRules& rules);

/// One word per line, '#' comments and blank lines skipped, lowercased.
std::unordered_set<std::string> load_word_list(const std::filesystem::path& path);

/// Stoplist plus stemmer rules; the fixed tables behind preprocess_text.
struct TextResources {
    Stoplist stoplist;
    StemmerRules rules;

    /// Loads `stopwords-id.txt` and `kata-dasar.txt` from `data_dir`.
    static TextResources load(const std::filesystem::path& data_dir);
};

/// fold case -> tokenize -> drop stopwords -> stem.
std::vector<std::string> preprocess_text(std::string_view text, const Stoplist& stoplist,
                                         const StemmerRules& rules);

inline std::vector<std::string> preprocess_text(std::string_view text, const TextResources& res) {
    return preprocess_text(text, res.stoplist, res.rules);
}

/// Directory holding the shipped word lists. Honors UMRAHGUARD_DATA_DIR,
/// else the path baked in at build time.
std::filesystem::path default_data_dir();

}  // namespace umrahguard

#include "umrahguard/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>

#include "umrahguard/errors.hpp"

namespace umrahguard {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0 && c < 0x80; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

constexpr std::size_t kMinRootLength = 2;

class StemSearch {
public:
    explicit StemSearch(const StemmerRules& rules) : rules_(rules) {}

    bool known(const std::string& w) const { return rules_.root_dictionary.contains(w); }

    std::optional<std::string> strip_prefixes(const std::string& word, std::size_t depth) const {
        if (depth >= rules_.max_prefix_depth) return std::nullopt;
        for (const auto& rule : rules_.prefixes) {
            if (word.size() <= rule.prefix.size() || word.compare(0, rule.prefix.size(), rule.prefix) != 0) {
                continue;
            }
            const char next = word[rule.prefix.size()];
            if (!rule.next_chars.empty() && rule.next_chars.find(next) == std::string::npos) continue;

            std::string candidate = rule.recode + word.substr(rule.prefix.size());
            if (candidate.size() < kMinRootLength) continue;
            if (known(candidate)) return candidate;
            if (auto deeper = strip_prefixes(candidate, depth + 1)) return deeper;
        }
        return std::nullopt;
    }

private:
    const StemmerRules& rules_;
};

// Removes the first matching suffix of `list` if the remainder stays long
// enough. Returns true when something was removed.
bool strip_one(std::string& word, const std::vector<std::string>& list) {
    for (const auto& suffix : list) {
        if (ends_with(word, suffix) && word.size() - suffix.size() >= kMinRootLength) {
            word.resize(word.size() - suffix.size());
            return true;
        }
    }
    return false;
}

}  // namespace

std::string fold_case(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_alnum(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && is_alnum(static_cast<unsigned char>(text[i]))) ++i;
        if (i - start < 2) continue;
        const std::string_view tok = text.substr(start, i - start);
        const bool numeric =
            std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        if (!numeric) spans.push_back({start, i});
    }
    return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for (const auto& span : tokenize_spans(text)) {
        tokens.emplace_back(text.substr(span.begin, span.end - span.begin));
    }
    return tokens;
}

std::vector<StemmerRules::PrefixRule> StemmerRules::default_prefix_rules() {
    const std::string vowels = "aiueo";
    // Order is significant: longer allomorphs before shorter ones.
    return {
        {"di", "", ""},
        {"ke", "", ""},
        {"se", "", ""},
        {"ter", "", ""},
        {"ber", "", ""},
        {"be", "", ""},
        {"meny", vowels, "s"},
        {"meng", vowels, "k"},
        {"meng", "", ""},
        {"mem", "bfpv", ""},
        {"mem", vowels, "p"},
        {"men", "cdjstz", ""},
        {"men", vowels, "t"},
        {"me", "lmnrwy", ""},
        {"peny", vowels, "s"},
        {"peng", vowels, "k"},
        {"peng", "", ""},
        {"pem", "bfv", ""},
        {"pem", vowels, "p"},
        {"pen", "cdjstz", ""},
        {"pen", vowels, "t"},
        {"per", "", ""},
        {"pe", "lmnrwy", ""},
        {"pe", "", ""},
    };
}

std::string stem_token(std::string_view token, const StemmerRules& rules) {
    const StemSearch search(rules);
    std::string word(token);
    if (search.known(word)) return word;

    // Successive suffix layers; candidates[k] has k layers removed.
    std::vector<std::string> candidates{word};
    for (const auto* layer : {&rules.particle_suffixes, &rules.possessive_suffixes, &rules.derivational_suffixes}) {
        if (strip_one(word, *layer)) {
            if (search.known(word)) return word;
            candidates.push_back(word);
        }
    }

    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        if (auto root = search.strip_prefixes(*it, 0)) return *root;
    }
    return std::string(token);
}

std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open word list: " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        words.insert(fold_case(std::string_view(line).substr(first, last - first + 1)));
    }
    return words;
}

TextResources TextResources::load(const std::filesystem::path& data_dir) {
    TextResources res;
    res.stoplist.words = load_word_list(data_dir / "stopwords-id.txt");
    res.rules.root_dictionary = load_word_list(data_dir / "kata-dasar.txt");
    return res;
}

std::vector<std::string> preprocess_text(std::string_view text, const Stoplist& stoplist,
                                         const StemmerRules& rules) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(fold_case(text))) {
        if (stoplist.contains(tok)) continue;
        out.push_back(stem_token(tok, rules));
    }
    return out;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("UMRAHGUARD_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
#ifdef UMRAHGUARD_SOURCE_DATA_DIR
    // Build tree: the checked-in lists, as long as the sources are still around.
    if (std::filesystem::is_directory(UMRAHGUARD_SOURCE_DATA_DIR)) return UMRAHGUARD_SOURCE_DATA_DIR;
#endif
#ifdef UMRAHGUARD_INSTALL_DATA_DIR
    return UMRAHGUARD_INSTALL_DATA_DIR;
#else
    return "data";
#endif
}

}  // namespace umrahguard

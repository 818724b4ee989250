#include "umrahguard/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "umrahguard/errors.hpp"
#include "umrahguard/rng.hpp"
#include "umrahguard/textprep.hpp"

namespace umrahguard {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view label_name(Label l) noexcept { return l == Label::Official ? "official" : "unofficial"; }

bool is_valid_permission(std::string_view id) noexcept {
    if (id.empty() || id[0] < 'A' || id[0] > 'Z') return false;
    return std::all_of(id.begin(), id.end(),
                       [](char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; });
}

const std::vector<std::string>& default_watchlist() {
    static const std::vector<std::string> list{"READ_PHONE_STATE", "ACCESS_FINE_LOCATION", "READ_CONTACTS",
                                               "READ_SMS", "RECORD_AUDIO"};
    return list;
}

const std::set<std::string>& default_free_email_domains() {
    static const std::set<std::string> domains{"gmail.com", "yahoo.com", "yahoo.co.id", "hotmail.com",
                                               "outlook.com"};
    return domains;
}

std::string normalize_agency_name(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char ch : name) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) != 0 || c >= 0x80) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else if (std::isspace(c) != 0) {
            pending_space = true;
        }
        // other punctuation is dropped without splitting words
    }
    return out;
}

// --- registry --------------------------------------------------------------

RegistrySnapshot load_registry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open registry file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("registry " + path.string() + ": " + e.what());
    }
    RegistrySnapshot reg;
    try {
        for (const auto& n : doc.at("registered_names")) reg.registered_names.insert(normalize_agency_name(n.get<std::string>()));
        for (const auto& d : doc.at("free_email_domains")) reg.free_email_domains.insert(fold_case(d.get<std::string>()));
        for (const auto& p : doc.at("high_risk_permissions")) {
            auto id = p.get<std::string>();
            if (!is_valid_permission(id)) throw ValidationError("registry: invalid permission identifier '" + id + "'");
            reg.high_risk_permissions.push_back(std::move(id));
        }
    } catch (const json::exception& e) {
        throw ValidationError("registry " + path.string() + ": " + e.what());
    }
    return reg;
}

void save_registry(const RegistrySnapshot& registry, const std::filesystem::path& path) {
    ordered_json doc;
    doc["registered_names"] = registry.registered_names;
    doc["free_email_domains"] = registry.free_email_domains;
    doc["high_risk_permissions"] = registry.high_risk_permissions;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write registry file: " + path.string());
    out << doc.dump(2) << '\n';
}

// --- dataset I/O -----------------------------------------------------------

namespace {

const json& require(const json& obj, std::size_t line, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(line, field, "missing field");
    return *it;
}

std::string require_string(const json& obj, std::size_t line, const char* field) {
    const auto& v = require(obj, line, field);
    if (!v.is_string()) throw ParseError(line, field, "expected string");
    return v.get<std::string>();
}

std::uint64_t require_count(const json& obj, std::size_t line, const char* field) {
    const auto& v = require(obj, line, field);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ParseError(line, field, "expected non-negative integer");
}

double require_number(const json& obj, std::size_t line, const char* field) {
    const auto& v = require(obj, line, field);
    if (!v.is_number()) throw ParseError(line, field, "expected number");
    return v.get<double>();
}

AppRecord parse_record(const json& obj, std::size_t line) {
    if (!obj.is_object()) throw ParseError(line, "<record>", "expected JSON object");
    AppRecord r;
    r.app_id = require_string(obj, line, "app_id");
    if (r.app_id.empty()) throw ParseError(line, "app_id", "must be non-empty");
    r.name = require_string(obj, line, "name");
    r.developer_name = require_string(obj, line, "developer_name");
    r.developer_email_domain = require_string(obj, line, "developer_email_domain");
    r.description = require_string(obj, line, "description");

    const auto& perms = require(obj, line, "permissions");
    if (!perms.is_array()) throw ParseError(line, "permissions", "expected array");
    for (const auto& p : perms) {
        if (!p.is_string() || !is_valid_permission(p.get_ref<const std::string&>())) {
            throw ParseError(line, "permissions", "invalid permission identifier " + p.dump());
        }
        r.permissions.insert(p.get<std::string>());
    }

    r.download_count = require_count(obj, line, "download_count");
    r.rating = require_number(obj, line, "rating");
    if (!(r.rating >= 0.0 && r.rating <= 5.0)) throw ParseError(line, "rating", "must lie in [0, 5]");
    r.size_mb = require_number(obj, line, "size_mb");
    if (!(r.size_mb > 0.0)) throw ParseError(line, "size_mb", "must be positive");
    r.days_since_update = require_count(obj, line, "days_since_update");

    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw ParseError(line, "label", "expected 0 or 1");
        const auto v = it->get<std::int64_t>();
        if (v != 0 && v != 1) throw ParseError(line, "label", "expected 0 or 1");
        r.label = static_cast<Label>(v);
    }
    return r;
}

}  // namespace

std::vector<AppRecord> parse_dataset(std::string_view jsonl) {
    std::vector<AppRecord> records;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        const auto nl = jsonl.find('\n', pos);
        const auto line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "<json>", e.what());
        }
        auto rec = parse_record(obj, line_no);
        if (!seen.insert(rec.app_id).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate app_id '" + rec.app_id + "'");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<AppRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dataset: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error("read failure: " + path.string());
    return parse_dataset(buf.str());
}

std::string record_to_json_line(const AppRecord& r) {
    ordered_json obj;
    obj["app_id"] = r.app_id;
    obj["name"] = r.name;
    obj["developer_name"] = r.developer_name;
    obj["developer_email_domain"] = r.developer_email_domain;
    obj["description"] = r.description;
    obj["permissions"] = r.permissions;
    obj["download_count"] = r.download_count;
    obj["rating"] = r.rating;
    obj["size_mb"] = r.size_mb;
    obj["days_since_update"] = r.days_since_update;
    if (r.label) obj["label"] = label_index(*r.label);
    return obj.dump();
}

void save_dataset(const std::vector<AppRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset: " + path.string());
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

std::vector<AppRecord> clean_dataset(const std::vector<AppRecord>& records) {
    std::vector<AppRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (r.description.find_first_not_of(" \t\r\n\f\v") == std::string::npos) continue;
        if (!seen.emplace(fold_case(r.name), r.developer_name).second) continue;
        out.push_back(r);
    }
    return out;
}

// --- labeling --------------------------------------------------------------

std::string_view reason_name(LabelReason r) noexcept {
    switch (r) {
        case LabelReason::NotRegistered: return "not-registered";
        case LabelReason::FreeEmail: return "free-email";
        case LabelReason::RiskyPermissions: return "risky-permissions";
    }
    return "unknown";
}

LabelDecision apply_labeling_criteria(const AppRecord& record, const RegistrySnapshot& registry) {
    LabelDecision d;
    if (registry.registered_names.contains(normalize_agency_name(record.developer_name))) {
        d.label = Label::Official;
        return d;
    }
    d.label = Label::Unofficial;
    d.rationale.push_back(LabelReason::NotRegistered);
    if (registry.free_email_domains.contains(fold_case(record.developer_email_domain))) {
        d.rationale.push_back(LabelReason::FreeEmail);
    }
    const bool risky = std::any_of(registry.high_risk_permissions.begin(), registry.high_risk_permissions.end(),
                                   [&](const std::string& p) { return record.permissions.contains(p); });
    if (risky) d.rationale.push_back(LabelReason::RiskyPermissions);
    return d;
}

// --- synthetic data --------------------------------------------------------

namespace {

std::vector<WeightedTerm> terms(std::initializer_list<std::pair<const char*, double>> list) {
    std::vector<WeightedTerm> out;
    for (const auto& [t, w] : list) out.push_back({t, w});
    return out;
}

const std::vector<std::string> kFillerStopwords{"dan", "yang", "untuk", "dengan", "di", "ke", "dari", "kami",
                                                "anda", "ini", "adalah", "akan", "dalam", "juga", "bagi", "serta"};

const std::vector<std::string> kOfficialNameA{"amanah", "barokah", "mulia", "cahaya", "nur",   "rahmah",
                                              "hikmah", "salam",   "firdaus", "zamzam", "arafah", "safa"};
const std::vector<std::string> kOfficialNameB{"wisata", "tour", "mandiri", "utama", "insani",
                                              "sejahtera", "abadi", "persada", "nusantara", "semesta"};
const std::vector<std::string> kUnofficialNameA{"umroh", "haji",  "travel", "promo", "berkah", "murah",
                                                "kilat", "hemat", "jaya",   "sukses", "maju",  "sentosa"};
const std::vector<std::string> kBenignPermissions{"CAMERA", "WRITE_EXTERNAL_STORAGE", "VIBRATE", "POST_NOTIFICATIONS",
                                                  "WAKE_LOCK"};

std::string title_case(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string official_developer(std::size_t i) {
    const auto& a = kOfficialNameA[i % kOfficialNameA.size()];
    const auto& b = kOfficialNameB[(i / kOfficialNameA.size()) % kOfficialNameB.size()];
    const auto round = i / (kOfficialNameA.size() * kOfficialNameB.size());
    std::string name = "PT " + title_case(a) + " " + title_case(b);
    if (round > 0) name += " " + std::to_string(round + 1);
    return name;
}

std::string unofficial_developer(std::size_t i) {
    return title_case(kUnofficialNameA[i % kUnofficialNameA.size()]) + " Dev " + std::to_string(100 + i);
}

std::string slug(std::string_view s) {
    std::string out;
    for (char c : normalize_agency_name(s)) {
        if (c != ' ') out.push_back(c);
    }
    return out;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

const std::string& draw_term(Rng& rng, const std::vector<WeightedTerm>& pool) {
    std::vector<double> w;
    w.reserve(pool.size());
    for (const auto& t : pool) w.push_back(t.weight);
    return pool[rng.weighted_index(w)].term;
}

void validate_pool(const std::vector<WeightedTerm>& pool, const char* name) {
    if (pool.empty()) throw ValidationError(std::string("generator: ") + name + " is empty");
    for (const auto& t : pool) {
        if (t.term.empty() || !(t.weight > 0.0)) {
            throw ValidationError(std::string("generator: ") + name + " has an empty term or non-positive weight");
        }
    }
}

std::set<std::string> draw_permissions(Rng& rng, bool official, double p_highrisk,
                                       const std::vector<std::string>& watchlist) {
    std::set<std::string> perms{"INTERNET"};
    if (official || rng.bernoulli(0.6)) perms.insert("ACCESS_NETWORK_STATE");
    for (const auto& p : kBenignPermissions) {
        if (rng.bernoulli(official ? 0.2 : 0.3)) perms.insert(p);
    }
    if (rng.bernoulli(p_highrisk)) {
        // Phone-state and location requests dominate; later slots are rarer.
        std::vector<double> weights;
        for (std::size_t k = 0; k < watchlist.size(); ++k) weights.push_back(k < 2 ? 3.0 : (k == 2 ? 2.0 : 1.0));
        const auto count = official ? 1 : static_cast<std::size_t>(rng.between(1, 3));
        for (std::size_t c = 0; c < count; ++c) {
            const auto k = rng.weighted_index(weights);
            perms.insert(watchlist[k]);
            weights[k] = 0.0;
            if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) break;
        }
    }
    return perms;
}

AppRecord make_record(const GeneratorConfig& cfg, std::size_t index, bool official) {
    Rng rng(derive_seed(cfg.seed, index));
    const std::size_t class_index = official ? index : index - cfg.n_official;

    AppRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "app-%04zu", index + 1);
    r.app_id = id;

    if (official) {
        r.developer_name = official_developer(class_index);
        r.developer_email_domain = slug(r.developer_name.substr(3)) + ".co.id";
        r.name = r.developer_name.substr(3) + " Umrah & Haji";
    } else {
        r.developer_name = unofficial_developer(class_index);
        static const std::vector<std::string> free{"gmail.com", "yahoo.com", "yahoo.co.id"};
        r.developer_email_domain = rng.bernoulli(0.8) ? free[rng.below(free.size())]
                                                      : slug(r.developer_name) + ".com";
        r.name = "Paket " + title_case(kUnofficialNameA[(class_index * 7 + 3) % kUnofficialNameA.size()]) +
                 " Umroh " + std::to_string(class_index + 1);
    }

    const auto& own = official ? cfg.official_vocab : cfg.unofficial_vocab;
    const auto& other = official ? cfg.unofficial_vocab : cfg.official_vocab;
    const auto length = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(cfg.min_description_tokens),
                                                             static_cast<std::int64_t>(cfg.max_description_tokens)));
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
        const double u = rng.uniform();
        std::string_view word;
        if (u < 0.2) {
            word = kFillerStopwords[rng.below(kFillerStopwords.size())];
        } else if (u < 0.55) {
            word = rng.bernoulli(cfg.noise_rate) ? draw_term(rng, other) : draw_term(rng, own);
        } else {
            word = draw_term(rng, cfg.shared_vocab);
        }
        if (!text.empty()) text.push_back(' ');
        text += word;
    }
    r.description = title_case(text) + ".";

    r.permissions = draw_permissions(rng, official, official ? cfg.p_highrisk_official : cfg.p_highrisk_unofficial,
                                     cfg.watchlist);
    if (official) {
        r.download_count = static_cast<std::uint64_t>(std::pow(10.0, rng.uniform(3.0, 6.0)));
        r.rating = round_to(rng.uniform(3.8, 4.9), 0.1);
        r.size_mb = round_to(rng.uniform(15.0, 80.0), 0.1);
        r.days_since_update = static_cast<std::uint64_t>(rng.between(0, 180));
    } else {
        r.download_count = static_cast<std::uint64_t>(std::pow(10.0, rng.uniform(2.0, 5.0)));
        r.rating = round_to(rng.uniform(2.5, 4.8), 0.1);
        r.size_mb = round_to(rng.uniform(5.0, 40.0), 0.1);
        r.days_since_update = static_cast<std::uint64_t>(rng.between(30, 720));
    }
    r.label = official ? Label::Official : Label::Unofficial;
    return r;
}

}  // namespace

GeneratorConfig GeneratorConfig::reference(std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    // Anchored on the word-cloud terms; remaining entries are filler.
    cfg.official_vocab = terms({{"resmi", 6},       {"kemenag", 5},    {"izin", 4},       {"jamaah", 4},
                                {"ibadah", 3},      {"pelayanan", 3},  {"visa", 3},       {"terdaftar", 3},
                                {"pendaftaran", 2}, {"mendaftar", 2},  {"berizin", 2},    {"ppiu", 2},
                                {"manasik", 2},     {"bimbingan", 2},  {"pembimbing", 1}, {"legalitas", 1},
                                {"terakreditasi", 1}, {"sertifikat", 1}, {"amanah", 1},   {"terpercaya", 1},
                                {"kantor", 1},      {"asuransi", 1},   {"muthawif", 1}});
    cfg.unofficial_vocab = terms({{"murah", 6},    {"promo", 5},    {"diskon", 4},   {"cepat", 4},
                                  {"hemat", 3},    {"gratis", 3},   {"bonus", 3},    {"termurah", 2},
                                  {"cashback", 2}, {"terbatas", 2}, {"buruan", 2},   {"dijamin", 2},
                                  {"potongan", 2}, {"cicilan", 2},  {"transfer", 1}, {"kuota", 1},
                                  {"spesial", 1},  {"segera", 1},   {"hubungi", 1},  {"whatsapp", 1},
                                  {"kilat", 1}});
    cfg.shared_vocab = terms({{"umrah", 5},     {"haji", 4},    {"paket", 4},     {"travel", 3},
                              {"perjalanan", 3}, {"aplikasi", 3}, {"hotel", 2},     {"makkah", 2},
                              {"madinah", 2},   {"tiket", 2},   {"pesawat", 2},   {"jadwal", 2},
                              {"informasi", 2}, {"keluarga", 1}, {"tanah", 1},    {"suci", 1},
                              {"nyaman", 1},    {"fasilitas", 1}, {"program", 1}, {"pilihan", 1},
                              {"kamar", 1},     {"tersedia", 1}, {"bintang", 1}});
    return cfg;
}

void GeneratorConfig::validate() const {
    if (n_official == 0 || n_unofficial == 0) throw ValidationError("generator: class counts must be positive");
    for (double p : {p_highrisk_official, p_highrisk_unofficial, noise_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("generator: probabilities must lie in [0, 1]");
    }
    if (min_description_tokens == 0 || min_description_tokens > max_description_tokens) {
        throw ValidationError("generator: description length range must satisfy 0 < min <= max");
    }
    validate_pool(official_vocab, "official_vocab");
    validate_pool(unofficial_vocab, "unofficial_vocab");
    validate_pool(shared_vocab, "shared_vocab");
    if (watchlist.empty()) throw ValidationError("generator: watchlist is empty");
}

std::vector<AppRecord> generate_synthetic(const GeneratorConfig& config) {
    config.validate();
    std::vector<AppRecord> out;
    const std::size_t total = config.n_official + config.n_unofficial;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) out.push_back(make_record(config, i, i < config.n_official));
    return out;
}

RegistrySnapshot synthetic_registry(const GeneratorConfig& config) {
    RegistrySnapshot reg;
    for (std::size_t i = 0; i < config.n_official; ++i) {
        reg.registered_names.insert(normalize_agency_name(official_developer(i)));
    }
    reg.free_email_domains = default_free_email_domains();
    reg.high_risk_permissions = config.watchlist;
    return reg;
}

// --- augmentation ----------------------------------------------------------

SynonymMap SynonymMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synonym map: " + path.string());
    SynonymMap map;
    try {
        const auto doc = json::parse(in);
        for (const auto& [root, list] : doc.items()) map.entries[root] = list.get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ValidationError("synonym map " + path.string() + ": " + e.what());
    }
    map.validate();
    return map;
}

void SynonymMap::validate() const {
    for (const auto& [root, list] : entries) {
        if (fold_case(root) != root) throw ValidationError("synonym map: '" + root + "' is not lowercase");
        if (list.empty()) throw ValidationError("synonym map: '" + root + "' has no replacements");
        bool only_self = true;
        for (const auto& s : list) {
            if (fold_case(s) != s) throw ValidationError("synonym map: '" + s + "' is not lowercase");
            // Replacements must stay single tokens so token counts are preserved.
            const auto toks = tokenize(s);
            if (toks.size() != 1 || toks[0] != s) {
                throw ValidationError("synonym map: replacement '" + s + "' is not a single token");
            }
            only_self = only_self && s == root;
        }
        if (only_self) throw ValidationError("synonym map: '" + root + "' maps only to itself");
    }
}

std::string replace_synonyms(std::string_view description, const SynonymMap& map, double rate, std::uint64_t seed,
                             const std::set<std::string>& stoplist) {
    Rng rng(seed);
    std::string out;
    std::size_t copied = 0;
    for (const auto& span : tokenize_spans(description)) {
        const auto token = fold_case(description.substr(span.begin, span.end - span.begin));
        if (stoplist.contains(token)) continue;
        const auto it = map.entries.find(token);
        if (it == map.entries.end()) continue;
        if (!rng.bernoulli(rate)) continue;
        const auto& choice = it->second[rng.below(it->second.size())];
        out.append(description.substr(copied, span.begin - copied));
        out += choice;
        copied = span.end;
    }
    out.append(description.substr(copied));
    return out;
}

std::vector<AppRecord> augment_synonyms(const std::vector<AppRecord>& records, const SynonymMap& map, double rate,
                                        std::uint64_t seed, const std::set<std::string>& stoplist,
                                        std::size_t copies) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("augmentation rate must lie in [0, 1]");
    std::vector<AppRecord> out = records;
    out.reserve(records.size() * (copies + 1));
    for (std::size_t k = 1; k <= copies; ++k) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            AppRecord copy = records[i];
            copy.app_id += "-aug" + std::to_string(k);
            copy.description =
                replace_synonyms(records[i].description, map, rate, derive_seed(seed, i * (copies + 1) + k), stoplist);
            out.push_back(std::move(copy));
        }
    }
    return out;
}

}  // namespace umrahguard

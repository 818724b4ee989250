#include <doctest.h>

#include "support/fixtures.hpp"
#include "umrahguard/textprep.hpp"

using namespace umrahguard;
using umrahguard::testing::resources;

namespace {

using Tokens = std::vector<std::string>;

StemmerRules toy_rules(std::initializer_list<const char*> roots) {
    StemmerRules r;
    for (auto w : roots) r.root_dictionary.insert(w);
    return r;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize(fold_case("Umrah 2024, resmi!")) == Tokens{"umrah", "resmi"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("biro-resmi") == Tokens{"biro", "resmi"});
    CHECK(tokenize("a b cd 7 x9") == Tokens{"cd", "x9"});
    CHECK(tokenize("Paket") == Tokens{"Paket"});  // no folding here
}

TEST_CASE("token spans line up with tokens") {
    const std::string text = "  Paket, umrah-resmi 2024 ok";
    const auto spans = tokenize_spans(text);
    const auto tokens = tokenize(text);
    REQUIRE(spans.size() == tokens.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        CHECK(text.substr(spans[i].begin, spans[i].end - spans[i].begin) == tokens[i]);
    }
}

TEST_CASE("non-ASCII bytes act as separators") {
    CHECK(tokenize("umrah\xC2\xA0resmi") == Tokens{"umrah", "resmi"});
}

TEST_CASE("stemmer reduces the daftar family") {
    const auto& rules = resources().rules;
    CHECK(stem_token("pendaftaran", rules) == "daftar");
    CHECK(stem_token("mendaftar", rules) == "daftar");
    CHECK(stem_token("terdaftar", rules) == "daftar");
    CHECK(stem_token("umrah", rules) == "umrah");
}

TEST_CASE("stemmer affix coverage") {
    const auto& rules = resources().rules;
    CHECK(stem_token("pelayanan", rules) == "layan");
    CHECK(stem_token("bimbingan", rules) == "bimbing");
    CHECK(stem_token("pembimbing", rules) == "bimbing");
    CHECK(stem_token("terpercaya", rules) == "percaya");
    CHECK(stem_token("terakreditasi", rules) == "akreditasi");
    CHECK(stem_token("perjalanan", rules) == "jalan");
    CHECK(stem_token("keberangkatan", rules) == "berangkat");
    CHECK(stem_token("buruan", rules) == "buru");
    CHECK(stem_token("potongan", rules) == "potong");
    CHECK(stem_token("hubungi", rules) == "hubung");
    CHECK(stem_token("tersedia", rules) == "sedia");
    CHECK(stem_token("dijamin", rules) == "jamin");
    CHECK(stem_token("terbatas", rules) == "batas");
}

TEST_CASE("recoding restores the assimilated initial") {
    const auto rules = toy_rules({"sewa", "kirim", "pilih", "tulis"});
    CHECK(stem_token("menyewa", rules) == "sewa");
    CHECK(stem_token("mengirim", rules) == "kirim");
    CHECK(stem_token("memilih", rules) == "pilih");
    CHECK(stem_token("menulis", rules) == "tulis");
    CHECK(stem_token("penulisan", rules) == "tulis");
    CHECK(stem_token("pengiriman", rules) == "kirim");
}

TEST_CASE("particles and possessives come off before derivational suffixes") {
    const auto rules = toy_rules({"daftar", "paket"});
    CHECK(stem_token("daftarlah", rules) == "daftar");
    CHECK(stem_token("paketnya", rules) == "paket");
    CHECK(stem_token("pendaftarannyalah", rules) == "daftar");
}

TEST_CASE("unknown words come back unchanged") {
    const auto& rules = resources().rules;
    CHECK(stem_token("xyzkan", rules) == "xyzkan");
    CHECK(stem_token("whatsapp", rules) == "whatsapp");
    CHECK(stem_token("", rules).empty());
}

TEST_CASE("stemming is idempotent over the shipped root dictionary") {
    const auto& rules = resources().rules;
    REQUIRE(rules.root_dictionary.size() > 500);
    std::size_t failures = 0;
    for (const auto& root : rules.root_dictionary) {
        const auto once = stem_token(root, rules);
        if (stem_token(once, rules) != once || once != root) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("stemming is idempotent over corpus tokens") {
    const auto& rules = resources().rules;
    const auto& corpus = umrahguard::testing::reference_corpus();
    for (const auto& r : corpus.records) {
        for (const auto& tok : tokenize(fold_case(r.description))) {
            const auto once = stem_token(tok, rules);
            CHECK(stem_token(once, rules) == once);
        }
    }
}

TEST_CASE("preprocess_text runs fold, tokenize, stopwords, stem") {
    const auto& res = resources();
    CHECK(preprocess_text("Mendaftar Umrah yang Resmi", res) == Tokens{"daftar", "umrah", "resmi"});
    CHECK(preprocess_text("dan yang adalah", res).empty());
    CHECK(preprocess_text("PAKET UMRAH RESMI TERDAFTAR", res) == preprocess_text("paket umrah resmi terdaftar", res));
}

TEST_CASE("stopwords are dropped before stemming") {
    const auto& res = resources();
    const auto& corpus = umrahguard::testing::reference_corpus();
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        Tokens expected;
        for (const auto& tok : tokenize(fold_case(corpus.records[i].description))) {
            if (!res.stoplist.contains(tok)) expected.push_back(stem_token(tok, res.rules));
        }
        CHECK(corpus.tokens[i] == expected);
    }
}

TEST_CASE("word lists skip comments and blanks") {
    const auto words = load_word_list(default_data_dir() / "kata-dasar.txt");
    CHECK(words.contains("daftar"));
    for (const auto& w : words) {
        CHECK_FALSE(w.empty());
        CHECK(w.front() != '#');
    }
    CHECK(resources().stoplist.contains("yang"));
    CHECK_THROWS(load_word_list("/nonexistent/list.txt"));
}

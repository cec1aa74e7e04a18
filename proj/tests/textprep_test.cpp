#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "attackmap/rng.hpp"
#include "attackmap/textprep.hpp"
#include "support.hpp"

using namespace attackmap;
using namespace attackmap::textprep;

namespace {

// Random text mixing ASCII words, punctuation, digits, accented Latin,
// other scripts and invalid UTF-8 bytes.
std::string random_text(Rng& rng) {
    static const std::vector<std::string> pieces{
        "the",      "Attacker", "sends",  "packets", "ties",    "flies",  "happy", "generalizations",
        "running",  "SQL",      "and",    "OF",      "café",    "naïve",  "Ærø",   "œuvre",
        "Straße",   "日本語",   "привет", "\u2014",     "…",       "\t",     "\n",    "!!",
        "2024",     "x86_64",   "a",      "is",      "\xff\xfe", "\xc3",  "ß",     "cooperation",
        "relational", "skies",  "dying",  "agreed",  "sized",   "hopping", "ll",   "yy"};
    std::string out;
    const std::size_t n = rng.below(25);
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.2) {
            for (std::size_t k = 1 + rng.below(8); k > 0; --k) out.push_back(static_cast<char>(1 + rng.below(255)));
        } else {
            out += pieces[rng.below(pieces.size())];
        }
        out += rng.uniform() < 0.7 ? " " : "";
    }
    return out;
}

}  // namespace

TEST_SUITE("textprep") {

TEST_CASE("pipeline examples") {
    CHECK(preprocess("The Attacker, sends 2 packets!!") == TokenList{"attack", "send", "packet"});
    CHECK(preprocess("").empty());
    CHECK(preprocess("THE the The").empty());
    CHECK(preprocess("x86_64 buffer-overflow") == TokenList{"buffer", "overflow"});
    CHECK(preprocess("Café naïve") == TokenList{"cafe", "naiv"});
    CHECK(join({"a", "b"}) == "a b");
}

TEST_CASE("stemmer spot checks") {
    CHECK(stem("caresses") == "caress");
    CHECK(stem("ponies") == "poni");
    CHECK(stem("sky") == "sky");
    CHECK(stem("relational") == "relat");
    CHECK(stem("hopping") == "hop");
    CHECK(stem("generalizations") == "gener");
    CHECK(stem("as") == "as");
}

TEST_CASE("stemmer matches the reference vocabulary") {
    std::ifstream in(testing::kTestData / "porter_vocabulary.txt");
    REQUIRE(in);
    std::string word, expected;
    std::size_t checked = 0, mismatched = 0;
    while (in >> word >> expected) {
        ++checked;
        if (stem(word) != expected) {
            if (++mismatched <= 10) MESSAGE(word << ": got " << stem(word) << ", expected " << expected);
        }
    }
    CHECK(checked >= 20000);
    CHECK(mismatched == 0);
}

TEST_CASE("bundled stopword file equals the built-in list") {
    const auto& builtin = default_stopword_list();
    CHECK(builtin.size() == 179);
    CHECK(StopwordSet(builtin.begin(), builtin.end()).size() == 179);
    CHECK(load_stopwords(testing::kStopwordsFile) == default_stopwords());
}

TEST_CASE("custom stopwords") {
    const Preprocessor prep(StopwordSet{"packet"});
    CHECK(prep("the packets") == TokenList{"the"});
}

TEST_CASE("ascii folding") {
    CHECK(ascii_fold("Crème Brûlée") == "Creme Brulee");
    CHECK(ascii_fold("Straße") == "Strasse");
    CHECK(ascii_fold("a\x01" "b") == "a b");
    CHECK(ascii_fold("x\xff" "y") == "x y");
}

TEST_CASE("token invariants and idempotence on random text") {
    Rng rng(2024);
    const auto& stop = default_stopwords();
    for (int i = 0; i < 2000; ++i) {
        const auto text = random_text(rng);
        const auto tokens = preprocess(text);
        for (const auto& t : tokens) {
            CAPTURE(t);
            CHECK(t.size() >= kMinTokenLength);
            CHECK_FALSE(stop.contains(t));
            for (const char c : t) CHECK((c >= 'a' && c <= 'z'));
        }
        CHECK(preprocess(join(tokens)) == tokens);
    }
}

}

#include <cctype>
#include <fstream>
#include <string>

#include "attackmap/error.hpp"
#include "attackmap/textprep.hpp"

namespace attackmap::textprep {

namespace {

// ASCII equivalents for U+00C0..U+017F; empty means "no equivalent".
constexpr const char* kLatin1[64] = {
    "A", "A", "A", "A", "A", "A", "AE", "C", "E", "E", "E", "E", "I", "I", "I", "I",   // C0-CF
    "D", "N", "O", "O", "O", "O", "O", "",  "O", "U", "U", "U", "U", "Y", "TH", "ss",  // D0-DF
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",   // E0-EF
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y",   // F0-FF
};

constexpr const char* kLatinExtendedA[128] = {
    "A", "a", "A", "a", "A", "a", "C", "c", "C", "c", "C", "c", "C", "c", "D", "d",    // 100
    "D", "d", "E", "e", "E", "e", "E", "e", "E", "e", "E", "e", "G", "g", "G", "g",    // 110
    "G", "g", "G", "g", "H", "h", "H", "h", "I", "i", "I", "i", "I", "i", "I", "i",    // 120
    "I", "i", "IJ", "ij", "J", "j", "K", "k", "k", "L", "l", "L", "l", "L", "l", "L",  // 130
    "l", "L", "l", "N", "n", "N", "n", "N", "n", "n", "N", "n", "O", "o", "O", "o",    // 140
    "O", "o", "OE", "oe", "R", "r", "R", "r", "R", "r", "S", "s", "S", "s", "S", "s",  // 150
    "S", "s", "T", "t", "T", "t", "T", "t", "U", "u", "U", "u", "U", "u", "U", "u",    // 160
    "U", "u", "U", "u", "W", "w", "Y", "y", "Y", "Z", "z", "Z", "z", "Z", "z", "s",    // 170
};

const char* fold_code_point(char32_t cp) {
    if (cp >= 0xC0 && cp <= 0xFF) return kLatin1[cp - 0xC0];
    if (cp >= 0x100 && cp <= 0x17F) return kLatinExtendedA[cp - 0x100];
    return "";
}

// Decodes one UTF-8 sequence at text[i]; returns the code point and advances
// i. Malformed bytes decode to U+FFFD and consume one byte.
char32_t next_code_point(std::string_view text, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t length = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
        ++i;
        return lead;
    } else if ((lead & 0xE0) == 0xC0) {
        length = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        length = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        length = 4;
        cp = lead & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + length > text.size()) {
        ++i;
        return 0xFFFD;
    }
    for (std::size_t k = 1; k < length; ++k) {
        const auto byte = static_cast<unsigned char>(text[i + k]);
        if ((byte & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (byte & 0x3F);
    }
    i += length;
    return cp;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

const std::vector<std::string>& default_stopword_list() {
    static const std::vector<std::string> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
        "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
        "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs", "themselves", "what",
        "which", "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was",
        "were", "be", "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing",
        "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while", "of",
        "at", "by", "for", "with", "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
        "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all", "any",
        "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
        "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
        "don't", "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain",
        "aren", "aren't", "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't",
        "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
        "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
    };
    return words;
}

const StopwordSet& default_stopwords() {
    static const StopwordSet set(default_stopword_list().begin(), default_stopword_list().end());
    return set;
}

StopwordSet load_stopwords(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open stopword list " + file.string());
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return words;
}

std::string ascii_fold(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        const char32_t cp = next_code_point(utf8, i);
        if (cp < 0x80) {
            const auto c = static_cast<char>(cp);
            out.push_back(cp < 0x20 || cp == 0x7F ? ' ' : c);
            continue;
        }
        const char* folded = fold_code_point(cp);
        if (*folded == '\0') {
            out.push_back(' ');
        } else {
            out.append(folded);
        }
    }
    return out;
}

Preprocessor::Preprocessor() : stopwords_(default_stopwords()) {}

Preprocessor::Preprocessor(StopwordSet stopwords) : stopwords_(std::move(stopwords)) {}

TokenList Preprocessor::operator()(std::string_view text) const {
    // lowercase, punctuation -> space, digits dropped
    std::string cleaned;
    const auto folded = ascii_fold(text);
    cleaned.reserve(folded.size());
    for (const char c : folded) {
        if (is_ascii_alpha(c)) {
            cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (c >= '0' && c <= '9') {
            continue;
        } else {
            cleaned.push_back(' ');
        }
    }

    auto keep = [this](const std::string& token) {
        return token.size() >= kMinTokenLength && !stopwords_.contains(token);
    };

    TokenList tokens;
    std::size_t start = 0;
    while (start < cleaned.size()) {
        while (start < cleaned.size() && cleaned[start] == ' ') ++start;
        std::size_t end = start;
        while (end < cleaned.size() && cleaned[end] != ' ') ++end;
        if (end > start) {
            std::string token = cleaned.substr(start, end - start);
            if (keep(token)) {
                // Porter is not idempotent on a few inputs; iterate to a fixed
                // point so re-processing the output is a no-op.
                for (std::string next = stem(token); next != token; next = stem(token)) token = std::move(next);
                if (keep(token)) tokens.push_back(std::move(token));
            }
        }
        start = end;
    }
    return tokens;
}

TokenList preprocess(std::string_view text) {
    static const Preprocessor preprocessor;
    return preprocessor(text);
}

std::string join(const TokenList& tokens) {
    std::string out;
    for (const auto& token : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

}  // namespace attackmap::textprep

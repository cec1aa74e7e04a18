#pragma once

// Description text -> token list.
//
// Chain: ASCII-fold, lowercase, punctuation to spaces, digits removed,
// whitespace tokenization, stopword removal, short-token removal (< 3),
// Porter stemming. Stems are re-filtered so every emitted token is itself a
// fixed point of the chain.

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace attackmap::textprep {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

inline constexpr std::size_t kMinTokenLength = 3;

/// The bundled 179-word English list, in file order.
const std::vector<std::string>& default_stopword_list();
const StopwordSet& default_stopwords();

/// One word per line, UTF-8; blank lines ignored.
StopwordSet load_stopwords(const std::filesystem::path& file);

/// Decodes UTF-8, strips diacritics from Latin letters and maps anything
/// without an ASCII equivalent (and control characters) to a space.
std::string ascii_fold(std::string_view utf8);

/// Porter stemmer, reference-implementation variant. Input must be lowercase
/// ASCII letters; words of length <= 2 are returned unchanged.
std::string stem(std::string_view token);

class Preprocessor {
public:
    Preprocessor();
    explicit Preprocessor(StopwordSet stopwords);

    TokenList operator()(std::string_view text) const;

private:
    StopwordSet stopwords_;
};

TokenList preprocess(std::string_view text);

std::string join(const TokenList& tokens);

}  // namespace attackmap::textprep

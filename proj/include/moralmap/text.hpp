#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace moralmap::text {

/// Case-folded word tokens. Word characters are ASCII letters and digits and
/// every non-ASCII code point; an apostrophe (' or U+2019) joins two word
/// characters, so contractions ("i'm", "don't") stay single tokens; U+2019 is
/// emitted as '.
std::vector<std::string> word_tokens(std::string_view text);

/// Whitespace-delimited tokens, verbatim.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Collapses whitespace runs to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text) noexcept;

bool is_stopword(std::string_view lowercase_word) noexcept;

}  // namespace moralmap::text

#include "doctest.h"
#include "moralmap/text.hpp"

using namespace moralmap;

TEST_CASE("word tokens fold case and keep contractions") {
  CHECK(text::word_tokens("I'm GOING, we're   here!") ==
        std::vector<std::string>{"i'm", "going", "we're", "here"});
  CHECK(text::word_tokens("don\xE2\x80\x99t stop") == std::vector<std::string>{"don't", "stop"});
  CHECK(text::word_tokens("'quoted' end'") == std::vector<std::string>{"quoted", "end"});
  CHECK(text::word_tokens("").empty());
  CHECK(text::word_tokens("caf\xC3\xA9 ok") == std::vector<std::string>{"caf\xC3\xA9", "ok"});
}

TEST_CASE("whitespace helpers") {
  CHECK(text::collapse_whitespace("  a \t b\n\nc  ") == "a b c");
  CHECK(text::trim("  x ") == "x");
  CHECK(text::split_whitespace(" a  bb ").size() == 2);
}

TEST_CASE("stopwords") {
  CHECK(text::is_stopword("the"));
  CHECK(text::is_stopword("and"));
  CHECK_FALSE(text::is_stopword("vegan"));
  CHECK_FALSE(text::is_stopword("recipe"));
}

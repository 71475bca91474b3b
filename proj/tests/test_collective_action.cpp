#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "moralmap/collective_action.hpp"
#include "moralmap/text.hpp"

using namespace moralmap;

namespace {

CADictionary dict(const std::string& s) {
  std::istringstream in(s);
  return parse_dictionary(in);
}

/// Anchored alternation over the dictionary: stems become "stem.*".
std::regex regex_oracle(const CADictionary& d) {
  std::string pattern = "^(?:";
  for (std::size_t i = 0; i < d.patterns().size(); ++i) {
    std::string p = d.patterns()[i];
    const bool wild = p.back() == '*';
    if (wild) p.pop_back();
    std::string escaped;
    for (char c : p) {
      if (std::string("\\^$.|?*+()[]{}").find(c) != std::string::npos) escaped += '\\';
      escaped += c;
    }
    pattern += (i ? "|" : "") + escaped + (wild ? ".*" : "");
  }
  return std::regex(pattern + ")$");
}

/// Real-world comments that each contain a collective-action expression.
std::vector<std::string> marked_comments() {
  std::ifstream in(std::string(MORALMAP_TEST_DATA_DIR) + "/ca_marked_comments.txt");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("compile_dictionary") {
  CHECK(dict("unite\nprotest*\n").size() == 2);
  CHECK_THROWS_AS(dict("pro*test\n"), ValidationError);
  CHECK_THROWS_AS(dict(""), ValidationError);
  CHECK_THROWS_AS(dict("# only a comment\n\n"), ValidationError);
  CHECK_THROWS_AS(dict("*\n"), ValidationError);
  CHECK_THROWS_AS(dict("unite\nUnite\n"), ValidationError);
  CHECK_THROWS_AS(compile_dictionary("/nonexistent.dic"), DataError);
}

TEST_CASE("bundled dictionary has 47 patterns") {
  CHECK(compile_dictionary(default_dictionary_path()).size() == 47);
}

TEST_CASE("ca_frequency") {
  const auto d = dict("unite\nprotest*\n");
  const auto s = ca_frequency("we unite and we are protesting the farm today ok", d);
  CHECK(s.total == 10);
  CHECK(s.matched == 2);
  CHECK(s.frequency == doctest::Approx(0.2));
  CHECK(s.has_marker);
  CHECK(d.matches("protesting"));
  CHECK_FALSE(d.matches("unites"));
  const auto none = ca_frequency("nothing relevant here", d);
  CHECK(none.frequency == 0.0);
  CHECK_FALSE(none.has_marker);
  CHECK(ca_frequency("", d).frequency == 0.0);
}

TEST_CASE("example comments all carry a marker") {
  const auto d = compile_dictionary(default_dictionary_path());
  const auto comments = marked_comments();
  CHECK(comments.size() == 14);
  for (const auto& c : comments) {
    INFO(c);
    CHECK(ca_frequency(c, d).has_marker);
  }
}

TEST_CASE("matcher equals the anchored regex oracle") {
  const auto d = compile_dictionary(default_dictionary_path());
  const auto re = regex_oracle(d);
  std::vector<std::string> vocab;
  for (auto p : d.patterns()) {
    if (p.back() == '*') {
      p.pop_back();
      vocab.push_back(p);
      vocab.push_back(p + "ing");
      vocab.push_back(p.substr(0, p.size() - 1));
    } else {
      vocab.push_back(p);
      vocab.push_back(p + "s");
    }
  }
  for (const char* w : {"vegan", "the", "farm", "cow", "i", "we", "don't", "doing", "undo", "actual"})
    vocab.emplace_back(w);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    std::string comment;
    const int len = static_cast<int>(rng() % 25);
    for (int j = 0; j < len; ++j) {
      std::string w = vocab[rng() % vocab.size()];
      if (rng() % 4 == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      comment += w + (rng() % 5 == 0 ? ", " : " ");
    }
    std::size_t expected = 0, total = 0;
    for (const auto& tok : text::word_tokens(comment)) {
      ++total;
      if (std::regex_match(tok, re)) ++expected;
    }
    const auto s = ca_frequency(comment, d);
    CHECK(s.matched == expected);
    CHECK(s.total == total);
  }
}

TEST_CASE("video aggregates") {
  const std::vector<CommentCA> two{{2, 10, 0.2, true}, {0, 5, 0.0, false}};
  const auto v = video_ca_stats(two);
  CHECK(v->mean_frequency == doctest::Approx(0.1));
  CHECK(v->marker_fraction == 0.5);
  CHECK(v->n_comments == 2);

  const std::vector<CommentCA> none{{0, 3, 0.0, false}, {0, 4, 0.0, false}};
  CHECK(video_ca_stats(none)->mean_frequency == 0.0);
  CHECK(video_ca_stats(none)->marker_fraction == 0.0);

  const std::vector<CommentCA> one{{1, 4, 0.25, true}};
  CHECK(video_ca_stats(one)->mean_frequency == 0.25);
  CHECK(video_ca_stats(one)->marker_fraction == 1.0);

  Warnings w;
  CHECK_FALSE(video_ca_stats({}, &w));
  CHECK_FALSE(w.empty());
}

TEST_CASE("aggregates are permutation invariant and consistent") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<CommentCA> cs;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 40); ++i) {
      const std::size_t total = 1 + rng() % 30, matched = rng() % 3 == 0 ? rng() % (total + 1) : 0;
      cs.push_back({matched, total, static_cast<double>(matched) / total, matched > 0});
    }
    const auto ref = *video_ca_stats(cs);
    CHECK((ref.marker_fraction == 0.0) == (ref.mean_frequency == 0.0));
    std::shuffle(cs.begin(), cs.end(), rng);
    const auto again = *video_ca_stats(cs);
    CHECK(again.mean_frequency == ref.mean_frequency);
    CHECK(again.marker_fraction == ref.marker_fraction);
  }
}

TEST_CASE("per-video file") {
  std::ostringstream out;
  write_video_ca(out, {{"v1", {2, 0.1, 0.5}}});
  CHECK(out.str() == "id,n_comments,mean_ca_freq,marker_fraction\nv1,2,0.1,0.5\n");
}

#include <random>
#include <sstream>

#include "doctest.h"
#include "moralmap/error.hpp"
#include "moralmap/moral.hpp"
#include "moralmap/stats.hpp"

using namespace moralmap;

namespace {

MoralLexicon lexicon(const std::string& s) {
  std::istringstream in(s);
  return parse_lexicon(in);
}

LoadedScores scores(const std::string& s) {
  std::istringstream in(s);
  return parse_external_scores(in);
}

}  // namespace

TEST_CASE("score_with_lexicon") {
  const auto text = "we care about caring and the others do not protest at all";
  CHECK(score_with_lexicon(text, MoralLexicon{}).raw == MoralVector{0, 0, 0, 0, 0});

  const auto lex = lexicon("care*\tcare\n# comment\nprotest*\tloyalty\t0.5\n");
  const auto ten = "one care two cares three four five six seven eight";
  const auto s = score_with_lexicon(ten, lex);
  CHECK(at(s.raw, Dimension::care) == doctest::Approx(0.2));
  CHECK(at(s.raw, Dimension::fairness) == 0.0);
  CHECK(at(score_with_lexicon("protesting", lex).raw, Dimension::loyalty) == doctest::Approx(0.5));
  CHECK(score_with_lexicon("", lex).raw == MoralVector{0, 0, 0, 0, 0});
  CHECK_FALSE(s.adjusted.has_value());
}

TEST_CASE("lexicon validation") {
  CHECK_THROWS_AS(lexicon("ca*re\tcare\n"), DataError);
  CHECK_THROWS_AS(lexicon("care\tkindness\n"), DataError);
  CHECK_THROWS_AS(lexicon("care\tcare\t-1\n"), DataError);
}

TEST_CASE("lexicon scorer is order invariant") {
  const auto lex = lexicon("care*\tcare\nfair\tfairness\nloyal*\tloyalty\n");
  std::vector<std::string> words{"care", "fair", "loyalty", "x", "y", "caring", "z", "loyal"};
  std::mt19937_64 rng(3);
  const auto join = [&] {
    std::string s;
    for (const auto& w : words) s += w + " ";
    return s;
  };
  const auto ref = score_with_lexicon(join(), lex).raw;
  for (int i = 0; i < 50; ++i) {
    std::shuffle(words.begin(), words.end(), rng);
    CHECK(score_with_lexicon(join(), lex).raw == ref);
  }
}

TEST_CASE("load_external_scores") {
  const auto ok = scores("id,care,fairness,loyalty,authority,sanctity\nv1,0.1,0.2,0.3,0.4,0.5\n");
  REQUIRE(ok.scores.size() == 1);
  CHECK(ok.scores.at("v1").raw == MoralVector{0.1, 0.2, 0.3, 0.4, 0.5});

  const auto reordered = scores("sanctity,id,care,fairness,loyalty,authority\n0.5,v1,0.1,0.2,0.3,0.4\n");
  CHECK(reordered.scores.at("v1").raw == MoralVector{0.1, 0.2, 0.3, 0.4, 0.5});

  const auto bad = scores("id,care,fairness,loyalty,authority,sanctity\nv1,1.2,0,0,0,0\nv2,0,0,0,0,0\n");
  CHECK(bad.scores.size() == 1);
  REQUIRE(bad.errors.size() == 1);
  CHECK(bad.errors[0].line == 2);

  CHECK_THROWS_AS(scores("id,care,fairness,loyalty,authority\nv1,0,0,0,0\n"), DataError);
  CHECK_THROWS_AS(scores("id,care,fairness,loyalty,authority,sanctity\nv1,0,0,0,0,0\nv1,0,0,0,0,0\n"),
                  DataError);
}

TEST_CASE("score file round trip") {
  ScoreTable t;
  t["a"].raw = {0.1, 0.25, 0.333, 0.0, 1.0};
  std::ostringstream out;
  write_scores(out, t, ScoreVariant::raw);
  CHECK(scores(out.str()).scores.at("a").raw == t["a"].raw);
}

TEST_CASE("baseline_adjust examples") {
  ScoreTable target, baseline;
  target["a"].raw = {0.2, 0.5, 0, 0, 0};
  target["b"].raw = {0.4, 0.5, 0, 0, 0};
  baseline["x"].raw = {0.1, 0, 0, 0, 0};
  Warnings w;
  const auto adj = baseline_adjust(target, baseline, &w);
  CHECK((*adj.at("a").adjusted)[0] == doctest::Approx(-0.7071068));
  CHECK((*adj.at("b").adjusted)[0] == doctest::Approx(0.7071068));
  CHECK((*adj.at("a").adjusted)[1] == 0.0);
  CHECK_FALSE(w.empty());
  CHECK_THROWS_AS(baseline_adjust(target, {}), DomainError);
  CHECK_THROWS_AS(baseline_adjust({}, baseline), DomainError);
}

TEST_CASE("baseline_adjust properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  for (int rep = 0; rep < 20; ++rep) {
    ScoreTable target, baseline;
    for (int i = 0; i < 30; ++i)
      for (auto d : kDimensions) at(target["t" + std::to_string(i)].raw, d) = u(rng);
    for (int i = 0; i < 10; ++i)
      for (auto d : kDimensions) at(baseline["b" + std::to_string(i)].raw, d) = u(rng);
    const auto adj = baseline_adjust(target, baseline);
    for (std::size_t d = 0; d < 5; ++d) {
      std::vector<double> col;
      for (const auto& [id, s] : adj) col.push_back((*s.adjusted)[d]);
      CHECK(std::fabs(stats::mean(col)) < 1e-9);
      CHECK(std::fabs(stats::sample_sd(col) - 1.0) < 1e-9);
    }
    const double c = 0.15;
    auto t2 = target, b2 = baseline;
    for (auto& [id, s] : t2) s.raw[2] += c;
    for (auto& [id, s] : b2) s.raw[2] += c;
    const auto adj2 = baseline_adjust(t2, b2);
    for (const auto& [id, s] : adj) CHECK(std::fabs((*s.adjusted)[2] - (*adj2.at(id).adjusted)[2]) < 1e-9);
  }
}

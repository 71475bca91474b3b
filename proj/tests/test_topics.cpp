#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "moralmap/error.hpp"
#include "moralmap/topics.hpp"

using namespace moralmap;

namespace {

/// 50 docs over {recipe, bake, flour}, 50 over {protest, rights, animals}.
TopicCorpus two_sets(std::uint64_t seed) {
  const std::vector<std::string> a{"recipe", "bake", "flour"}, b{"protest", "rights", "animals"};
  std::mt19937_64 rng(seed);
  std::vector<std::string> ids, texts;
  for (int d = 0; d < 100; ++d) {
    const auto& words = d < 50 ? a : b;
    std::string t;
    for (int i = 0; i < 20; ++i) t += words[rng() % 3] + " ";
    char id[8];
    std::snprintf(id, sizeof id, "d%03d", d);
    ids.emplace_back(id);
    texts.push_back(t);
  }
  return build_topic_corpus(ids, texts);
}

void check_stochastic(const LdaModel& m) {
  for (std::size_t t = 0; t < m.topic_word.rows(); ++t) {
    double s = 0;
    for (double v : m.topic_word.row(t)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::fabs(s - 1.0) <= 1e-9);
  }
  for (std::size_t d = 0; d < m.doc_topic.rows(); ++d) {
    double s = 0;
    for (double v : m.doc_topic.row(d)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::fabs(s - 1.0) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("vocabulary drops stopwords and rare words") {
  const auto c = build_topic_corpus({"a", "b"}, {"the vegan recipe once", "The vegan recipe twice"});
  CHECK(c.vocabulary == std::vector<std::string>{"recipe", "vegan"});
  CHECK(c.token_count() == 4);
}

TEST_CASE("single-word vocabulary") {
  const auto c = build_topic_corpus({"a", "b", "c"}, {"vegan", "vegan vegan", "vegan"});
  LdaConfig cfg;
  cfg.iterations = 50;
  const auto m = lda_fit(c, cfg);
  CHECK(m.topic_word(0, 0) == doctest::Approx(1.0));
  CHECK(m.topic_word(1, 0) == doctest::Approx(1.0));
  check_stochastic(m);
}

TEST_CASE("recovery of two generating sets") {
  const auto c = two_sets(5);
  LdaConfig cfg;
  cfg.seed = 11;
  cfg.iterations = 200;
  cfg.burn_in = 50;
  const auto m = lda_fit(c, cfg);
  check_stochastic(m);
  const std::set<std::string> a{"recipe", "bake", "flour"}, b{"protest", "rights", "animals"};
  const auto w0 = top_words(m, 0, 3), w1 = top_words(m, 1, 3);
  const std::set<std::string> s0(w0.begin(), w0.end()), s1(w1.begin(), w1.end());
  CHECK(((s0 == a && s1 == b) || (s0 == b && s1 == a)));

  const std::size_t ethics = s0 == b ? 0 : 1;
  const auto kept = filter_by_topic(m, ethics);
  CHECK(kept.size() == 50);
  for (const auto& id : kept) CHECK(id >= "d050");
  for (const auto& id : top_docs(m, ethics, 5)) CHECK(id >= "d050");
  for (const auto& id : top_docs(m, 1 - ethics, 5)) CHECK(id < "d050");
  CHECK(topic_for_anchor(m, "protest") == ethics);
  CHECK_FALSE(topic_for_anchor(m, "zebra"));
}

TEST_CASE("determinism and token conservation") {
  const auto c = two_sets(6);
  LdaConfig cfg;
  cfg.seed = 4;
  cfg.iterations = 30;
  cfg.burn_in = 5;
  std::size_t sweeps = 0;
  const auto a = lda_fit(c, cfg, [&](std::size_t, const std::vector<std::size_t>& totals) {
    ++sweeps;
    std::size_t s = 0;
    for (auto t : totals) s += t;
    CHECK(s == c.token_count());
  });
  CHECK(sweeps == 30);
  const auto b = lda_fit(c, cfg);
  CHECK(a.assignments == b.assignments);
  CHECK(a.topic_word == b.topic_word);
}

TEST_CASE("fit preconditions") {
  LdaConfig cfg;
  CHECK_THROWS_AS(lda_fit(TopicCorpus{}, cfg), ValidationError);
  const auto tiny = build_topic_corpus({"a"}, {"vegan vegan"}, 1);
  CHECK_THROWS_AS(lda_fit(tiny, cfg), ValidationError);
  const auto empty_vocab = build_topic_corpus({"a", "b"}, {"one", "two"});
  CHECK_THROWS_AS(lda_fit(empty_vocab, cfg), ValidationError);
}

TEST_CASE("ranking rules") {
  LdaModel m;
  m.n_topics = 2;
  m.vocabulary = {"a", "b", "c", "d"};
  m.doc_ids = {"x", "y", "z"};
  m.topic_word = Matrix(2, 4, 0.25);
  m.doc_topic = Matrix(3, 2, {1.0, 0.0, 0.5, 0.5, 0.9, 0.1});
  CHECK(top_words(m, 0, 2) == std::vector<std::string>{"a", "b"});
  CHECK(top_words(m, 0, 10).size() == 4);
  CHECK(top_docs(m, 0, 5) == std::vector<std::string>{"x", "z", "y"});
  CHECK(filter_by_topic(m, 0) == std::vector<std::string>{"x", "y", "z"});
  CHECK(filter_by_topic(m, 1) == std::vector<std::string>{"y"});
  CHECK_THROWS_AS(top_words(m, 2), ValidationError);

  std::ostringstream out;
  write_doc_topics(out, m);
  CHECK(out.str() == "doc_id,argmax,p0,p1\nx,0,1,0\ny,0,0.5,0.5\nz,0,0.9,0.1\n");
}

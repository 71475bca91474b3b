#include <random>
#include <sstream>

#include "doctest.h"
#include "moralmap/embedding.hpp"
#include "moralmap/error.hpp"
#include "oracles.hpp"

using namespace moralmap;

namespace {

LoadedEmbeddings parse(const std::string& s) {
  std::istringstream in(s);
  return parse_embeddings(in);
}

}  // namespace

TEST_CASE("load_embeddings") {
  CHECK_THROWS_AS(parse("a,1,2,3,4,5\nb,1,2,3,4\n"), DataError);
  try {
    parse("a,1,2,3,4,5\nb,1,2,3,4\n");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::string row = "v1";
  for (int i = 0; i < 384; ++i) row += "," + std::to_string(0.001 * (i + 1));
  const auto one = parse(row + "\n");
  CHECK(one.table.size() == 1);
  CHECK(one.table.dim() == 384);
  CHECK_THROWS_AS(parse("a,1,2\na,3,4\n"), DataError);
  CHECK_THROWS_AS(parse("a,1,nan\n"), DataError);
  const auto header = parse("id,v0,v1\na,1,2\nb,0,0\n");
  CHECK(header.table.size() == 1);
  CHECK(header.errors.size() == 1);
}

TEST_CASE("cosine") {
  const std::vector<double> u{1, 2, 3}, v{4, 5, 6}, x{1, 0}, y{0, 1}, z{0, 0};
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  CHECK(cosine(x, y) == 0.0);
  CHECK(cosine(u, v) == doctest::Approx(0.9746318).epsilon(1e-7));
  CHECK_THROWS_AS(cosine(x, z), DomainError);
}

TEST_CASE("cosine is scale invariant") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1), s(0.01, 100);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const double c = cosine(a, b);
    const double alpha = s(rng), beta = s(rng);
    for (auto& v : a) v *= alpha;
    for (auto& v : b) v *= beta;
    CHECK(std::fabs(cosine(a, b) - c) < 1e-12);
  }
}

TEST_CASE("video_comment_alignment") {
  const std::vector<double> v{1, 0}, c1{1, 0}, c2{0, 1}, c3{1, 1};
  CHECK(video_comment_alignment(v, {c1}) == doctest::Approx(1.0));
  CHECK(video_comment_alignment(v, {c1, c2}) == doctest::Approx(0.7071068));
  const std::vector<double> w{1, -1};
  CHECK(std::fabs(video_comment_alignment(w, {c3, std::span<const double>(c3)})) < 1e-15);
  CHECK_THROWS_AS(video_comment_alignment(v, {}), DomainError);
  const std::vector<double> neg{-1, 0};
  CHECK_THROWS_AS(video_comment_alignment(v, {c1, neg}), DomainError);
}

TEST_CASE("alignment is permutation invariant") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> comments(25, std::vector<double>(6));
  for (auto& c : comments)
    for (auto& x : c) x = g(rng);
  std::vector<double> video(6);
  for (auto& x : video) x = g(rng);
  std::vector<std::span<const double>> spans(comments.begin(), comments.end());
  const double ref = video_comment_alignment(video, spans);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(spans.begin(), spans.end(), rng);
    CHECK(std::fabs(video_comment_alignment(video, spans) - ref) < 1e-12);
  }
}

TEST_CASE("silhouette examples") {
  const Matrix x(4, 1, {0, 1, 10, 11});
  const std::vector<int> labels{0, 0, 1, 1};
  const auto r = silhouette(x, labels, Metric::euclidean);
  CHECK(*r.scores[0] == doctest::Approx(0.9047619));

  const Matrix y(3, 1, {0, 1, 5});
  const auto single = silhouette(y, std::vector<int>{0, 0, 1}, Metric::euclidean);
  CHECK(*single.scores[2] == 0.0);

  const Matrix z(3, 1, {0, 1, 2});
  const auto eq = silhouette(z, std::vector<int>{0, 1, 0}, Metric::euclidean);
  CHECK(*eq.scores[0] == doctest::Approx(-0.5));
  CHECK(*eq.scores[1] == 0.0);

  Warnings w;
  const auto one = silhouette(x, std::vector<int>{0, 0, 0, kNoise}, Metric::euclidean, &w);
  CHECK_FALSE(w.empty());
  CHECK(*one.scores[0] == 0.0);
  CHECK_FALSE(one.scores[3].has_value());
}

TEST_CASE("silhouette matches the brute-force oracle") {
  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 20 + rng() % 281;
    const int k = 2 + static_cast<int>(rng() % 4);
    const std::size_t d = 2 + rng() % 6;
    Matrix x(n, d);
    std::vector<int> labels(n);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = (rng() % 10 == 0) ? kNoise : static_cast<int>(rng() % k);
      for (std::size_t j = 0; j < d; ++j) x(i, j) = g(rng) + (labels[i] + 1) * (j == 0 ? 2.0 : 0.0);
    }
    const Metric m = std::array{Metric::euclidean, Metric::manhattan, Metric::cosine}[inst % 3];
    const auto got = silhouette(x, labels, m);
    std::vector<double> want;
    if (m == Metric::euclidean) want = oracle::silhouette(x, labels, oracle::euclid);
    if (m == Metric::manhattan) want = oracle::silhouette(x, labels, oracle::manhattan);
    if (m == Metric::cosine) want = oracle::silhouette(x, labels, oracle::cosine_distance);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == kNoise) {
        CHECK_FALSE(got.scores[i].has_value());
        continue;
      }
      REQUIRE(got.scores[i].has_value());
      CHECK(std::fabs(*got.scores[i] - want[i]) <= 1e-9);
      CHECK(*got.scores[i] >= -1.0);
      CHECK(*got.scores[i] <= 1.0);
    }
  }
}

TEST_CASE("top_k_central") {
  const Matrix two(2, 1, {0, 1});
  const std::vector<std::string> ids2{"a", "b"};
  CHECK(top_k_central(two, ids2, 30).size() == 2);

  const Matrix line(3, 1, {0, 1, 10});
  const std::vector<std::string> ids{"0", "1", "10"};
  CHECK(top_k_central(line, ids, 30) == std::vector<std::string>{"1", "0", "10"});

  const Matrix same(3, 2, 1.0);
  const std::vector<std::string> ids3{"c", "a", "b"};
  CHECK(top_k_central(same, ids3, 2) == std::vector<std::string>{"a", "b"});
}

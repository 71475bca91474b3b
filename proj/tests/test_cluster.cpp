#include <random>
#include <sstream>

#include "doctest.h"
#include "moralmap/cluster.hpp"
#include "moralmap/embedding.hpp"
#include "oracles.hpp"

using namespace moralmap;

namespace {

const auto kDir = oracle::data_dir();

void check_sizes(const ClusterModel& m) {
  for (auto s : m.cluster_sizes()) CHECK(s >= m.params.min_cluster_size);
  for (int l : m.labels) {
    CHECK(l >= kNoise);
    CHECK(l < m.n_clusters);
  }
}

}  // namespace

TEST_CASE("fewer points than min_cluster_size are all noise") {
  const Matrix x(4, 2, {0, 0, 0, 1, 1, 0, 1, 1});
  const auto m = hdbscan(x, {2, 5, Metric::euclidean});
  CHECK(m.n_clusters == 0);
  for (int l : m.labels) CHECK(l == kNoise);
  CHECK(hdbscan(Matrix(1, 2, 0.0), {1, 2, Metric::euclidean}).labels == std::vector<int>{kNoise});
}

TEST_CASE("two blobs match the frozen reference labels") {
  const auto x = oracle::read_points(kDir / "two_blobs.csv");
  const auto m = hdbscan(x, {3, 5, Metric::euclidean});
  CHECK(m.n_clusters == 2);
  CHECK(m.labels == oracle::read_labels(kDir / "two_blobs_golden.csv"));
  CHECK(oracle::adjusted_rand(m.labels, oracle::read_labels(kDir / "two_blobs_truth.csv")) == 1.0);
  CHECK(m.noise_fraction() == 0.0);
  check_sizes(m);
}

TEST_CASE("uniform noise matches the frozen reference labels") {
  const auto x = oracle::read_points(kDir / "uniform.csv");
  const auto m = hdbscan(x, {5, 50, Metric::euclidean});
  CHECK(m.labels == oracle::read_labels(kDir / "uniform_golden.csv"));
  CHECK(m.noise_fraction() >= 0.6);
  check_sizes(m);
}

TEST_CASE("mixed fixture matches the reference for both metrics") {
  const auto x = oracle::read_points(kDir / "mixed.csv");
  const auto e = hdbscan(x, {5, 10, Metric::euclidean});
  CHECK(e.labels == oracle::read_labels(kDir / "mixed_golden.csv"));
  const auto m = hdbscan(x, {5, 10, Metric::manhattan});
  CHECK(m.labels == oracle::read_labels(kDir / "mixed_golden_manhattan.csv"));
  check_sizes(e);
  check_sizes(m);
}

TEST_CASE("hdbscan is deterministic and respects min_cluster_size on random data") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    Matrix x(150, 2);
    for (std::size_t i = 0; i < 150; ++i) {
      x(i, 0) = g(rng) + 6.0 * static_cast<double>(i % 3);
      x(i, 1) = g(rng);
    }
    const ClusteringParams p{1 + rng() % 10, 5 + rng() % 40, rep % 2 ? Metric::manhattan : Metric::euclidean};
    const auto a = hdbscan(x, p);
    CHECK(hdbscan(x, p).labels == a.labels);
    check_sizes(a);
  }
}

TEST_CASE("dbcv matches the frozen reference values") {
  const auto x = oracle::read_points(kDir / "two_blobs.csv");
  const auto truth = oracle::read_labels(kDir / "two_blobs_truth.csv");
  const auto shuffled = oracle::read_labels(kDir / "two_blobs_shuffled.csv");
  std::ifstream in(kDir / "two_blobs_dbcv.txt");
  double want_truth = 0, want_shuffled = 0;
  in >> want_truth >> want_shuffled;
  const double got_truth = dbcv(x, truth);
  const double got_shuffled = dbcv(x, shuffled);
  CHECK(got_truth == doctest::Approx(want_truth).epsilon(1e-9));
  CHECK(got_shuffled == doctest::Approx(want_shuffled).epsilon(1e-9));
  CHECK(got_truth > 0.0);
  CHECK(got_truth > got_shuffled);

  const auto mixed = oracle::read_points(kDir / "mixed.csv");
  const auto golden = oracle::read_labels(kDir / "mixed_golden.csv");
  CHECK(dbcv(mixed, golden) == doctest::Approx(oracle::read_number(kDir / "mixed_dbcv.txt")).epsilon(1e-9));
}

TEST_CASE("dbcv is invariant under cluster relabelling") {
  const auto x = oracle::read_points(kDir / "mixed.csv");
  const auto labels = oracle::read_labels(kDir / "mixed_golden.csv");
  const double ref = dbcv(x, labels);
  const std::map<int, int> perm{{-1, -1}, {0, 2}, {1, 0}, {2, 1}};
  std::vector<int> relabelled;
  for (int l : labels) relabelled.push_back(perm.at(l));
  CHECK(std::fabs(dbcv(x, relabelled) - ref) < 1e-9);
}

TEST_CASE("dbcv is undefined for fewer than two clusters") {
  const auto x = oracle::read_points(kDir / "two_blobs.csv");
  CHECK_THROWS_AS(dbcv(x, std::vector<int>(x.rows(), kNoise)), UndefinedScoreError);
  CHECK_THROWS_AS(dbcv(x, std::vector<int>(x.rows(), 0)), UndefinedScoreError);
}

TEST_CASE("random_search") {
  const auto x = oracle::read_points(kDir / "two_blobs.csv");
  SUBCASE("singleton space") {
    const SearchSpace space{{3}, {5}, {Metric::euclidean}};
    const auto r = random_search(x, space, 10, 1);
    CHECK(r.best == ClusteringParams{3, 5, Metric::euclidean});
    CHECK(r.log.size() == 1);
  }
  SUBCASE("two-point space selects the better minimum cluster size") {
    const SearchSpace space{{3}, {5, 70}, {Metric::euclidean}};
    const auto r = random_search(x, space, 2, 4);
    CHECK(r.best.min_cluster_size == 5);
    for (const auto& t : r.log)
      if (t.dbcv) CHECK(*t.dbcv <= *r.model.dbcv);
  }
  SUBCASE("returned score is the maximum of the log and the search is deterministic") {
    const auto mixed = oracle::read_points(kDir / "mixed.csv");
    const SearchSpace space{SearchSpace::range(2, 12), SearchSpace::range(5, 40),
                            {Metric::euclidean, Metric::manhattan}};
    const auto r = random_search(mixed, space, 25, 9);
    CHECK(r.log.size() == 25);
    double best = -2;
    for (const auto& t : r.log)
      if (t.dbcv) best = std::max(best, *t.dbcv);
    CHECK(*r.model.dbcv == best);
    const auto again = random_search(mixed, space, 25, 9);
    CHECK(again.best == r.best);
    CHECK(again.model.labels == r.model.labels);
    std::ostringstream a, b;
    write_trial_log(a, r.log);
    write_trial_log(b, again.log);
    CHECK(a.str() == b.str());
  }
  SUBCASE("all trials undefined") {
    const SearchSpace space{{3}, {70, 80}, {Metric::euclidean}};
    CHECK_THROWS_AS(random_search(x, space, 2, 1), SearchFailure);
  }
}

TEST_CASE("narrative labels") {
  ClusterModel m;
  m.labels = {0, 1, 1, kNoise};
  m.n_clusters = 2;
  CHECK(apply_narrative_labels(m, {}, Orientation::communal).narrative_labels.empty());
  CHECK_THROWS_AS(apply_narrative_labels(m, {{0, NarrativeLabel::goodhealth_benefits}}, Orientation::communal),
                  ValidationError);
  const auto labelled = apply_narrative_labels(
      m, {{0, NarrativeLabel::fight_convert}, {1, NarrativeLabel::educate_inform}}, Orientation::communal);
  CHECK(labelled.narrative_labels.at(0) == NarrativeLabel::fight_convert);
  CHECK_THROWS_AS(apply_narrative_labels(m, {{5, NarrativeLabel::other}}, Orientation::agency), ValidationError);

  std::istringstream in("# cluster\tlabel\n0\tfight_convert\n1\teducate_inform\n");
  CHECK(parse_label_mapping(in).size() == 2);
  std::istringstream bad("0\tbanana\n");
  CHECK_THROWS_AS(parse_label_mapping(bad), ValidationError);

  std::ostringstream out;
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  write_cluster_file(out, ids, labelled);
  CHECK(out.str() == "id,label,narrative_label\na,0,fight_convert\nb,1,educate_inform\nc,1,educate_inform\nd,-1,\n");
}

TEST_CASE("presets") {
  CHECK(ClusteringParams::preset("communal-default") == ClusteringParams{15, 15, Metric::manhattan});
  CHECK(ClusteringParams::preset("agency-default") == ClusteringParams{15, 150, Metric::euclidean});
  CHECK_FALSE(ClusteringParams::preset("nope"));
  CHECK_THROWS_AS((ClusteringParams{0, 5, Metric::euclidean}.validate()), ValidationError);
  CHECK_THROWS_AS((ClusteringParams{3, 1, Metric::euclidean}.validate()), ValidationError);
  CHECK_THROWS_AS((ClusteringParams{3, 5, Metric::cosine}.validate()), ValidationError);
}

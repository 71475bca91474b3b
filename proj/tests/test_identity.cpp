#include <random>
#include <sstream>

#include "doctest.h"
#include "moralmap/error.hpp"
#include "moralmap/identity.hpp"

using namespace moralmap;

TEST_CASE("pronoun_frequencies") {
  const auto empty = pronoun_frequencies("");
  CHECK(empty.f_i == 0.0);
  CHECK(empty.f_we == 0.0);
  CHECK(empty.token_count == 0);

  const auto s = pronoun_frequencies("i love what we do");
  CHECK(s.f_i == doctest::Approx(0.2));
  CHECK(s.f_we == doctest::Approx(0.2));
  CHECK(s.token_count == 5);

  const auto we = pronoun_frequencies("we we we we");
  CHECK(we.f_i == 0.0);
  CHECK(we.f_we == 1.0);
  CHECK(we.token_count == 4);

  const auto c = pronoun_frequencies("I'm sure We're fine, MY friend");
  CHECK(c.f_i == doctest::Approx(2.0 / 6.0));
  CHECK(c.f_we == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("ci_index anchors") {
  CHECK(ci_index({0, 0, 0}) == 0.5);
  CHECK(ci_index({0.2, 0, 5}) == doctest::Approx(0.5833333333333334).epsilon(1e-15));
  CHECK(ci_index({1, 0, 1}) == 0.75);
  CHECK(ci_index({0, 1, 1}) == 0.25);
}

TEST_CASE("ci_index rejects invalid statistics") {
  CHECK_THROWS_AS(ci_index({0.7, 0.7, 10}), DomainError);
  CHECK_THROWS_AS(ci_index({-0.1, 0, 10}), DomainError);
  CHECK_THROWS_AS(ci_index({0, 1.5, 10}), DomainError);
}

TEST_CASE("ci_index range, antisymmetry and monotonicity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const double x = ci_index({a, b, 1});
    CHECK(x >= 0.25);
    CHECK(x <= 0.75);
    CHECK(std::fabs(x + ci_index({b, a, 1}) - 1.0) <= 1e-12);
    if (a + 0.01 + b <= 1.0) CHECK(ci_index({a + 0.01, b, 1}) > x);
  }
}

TEST_CASE("classify_orientation") {
  CHECK(classify_orientation(0.35) == Orientation::communal);
  CHECK(classify_orientation(0.4) == Orientation::communal);
  CHECK(classify_orientation(0.5) == Orientation::unclassified);
  CHECK(classify_orientation(0.4000001) == Orientation::unclassified);
  CHECK(classify_orientation(0.5999999) == Orientation::unclassified);
  CHECK(classify_orientation(0.6) == Orientation::agency);
  CHECK(classify_orientation(0.75) == Orientation::agency);
  CHECK(classify_orientation(0.45, {0.5, 0.7}) == Orientation::communal);
}

TEST_CASE("ci output row") {
  std::ostringstream out;
  write_ci_header(out);
  write_ci_row(out, "v1", {0.2, 0, 5}, 0.5833333333333334, Orientation::unclassified);
  CHECK(out.str() == "id,f_i,f_we,ci_index,orientation\nv1,0.2,0,0.5833333333333334,unclassified\n");
}

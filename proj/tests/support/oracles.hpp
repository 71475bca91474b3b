#pragma once
// Independent reference computations used by the tests. They are written
// for clarity over speed and share no code with the library beyond the
// Matrix container.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "moralmap/matrix.hpp"

namespace oracle {

inline std::filesystem::path data_dir() { return MORALMAP_TEST_DATA_DIR; }

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double manhattan(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return 1.0 - ab / std::sqrt(aa * bb);
}

/// Plain textbook silhouette, noise (-1) excluded, singletons 0.
template <class Dist>
std::vector<double> silhouette(const moralmap::Matrix& x, const std::vector<int>& labels, Dist dist) {
  const std::size_t n = x.rows();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    std::map<int, std::pair<double, std::size_t>> sums;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] < 0) continue;
      auto& s = sums[labels[j]];
      s.first += dist(x.row(i), x.row(j));
      ++s.second;
    }
    if (!sums.contains(labels[i])) continue;
    const double a = sums[labels[i]].first / static_cast<double>(sums[labels[i]].second);
    double b = INFINITY;
    for (const auto& [l, s] : sums)
      if (l != labels[i]) b = std::min(b, s.first / static_cast<double>(s.second));
    const double m = std::max(a, b);
    out[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return out;
}

/// Adjusted Rand index from the contingency table.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  const auto c2 = [](double v) { return v * (v - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : cells) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Trustworthiness with brute-force euclidean neighbour ranks in both spaces.
inline double trustworthiness(const moralmap::Matrix& high, const moralmap::Matrix& low, std::size_t k) {
  const std::size_t n = high.rows();
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> by_high(n), by_low(n);
    std::iota(by_high.begin(), by_high.end(), 0);
    std::iota(by_low.begin(), by_low.end(), 0);
    const auto sort_by = [&](std::vector<std::size_t>& v, const moralmap::Matrix& m) {
      std::stable_sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
        if (a == i || b == i) return a == i && b != i;
        return euclid(m.row(i), m.row(a)) < euclid(m.row(i), m.row(b));
      });
    };
    sort_by(by_high, high);
    sort_by(by_low, low);
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[by_high[r]] = r;
    for (std::size_t r = 1; r <= k; ++r) {
      const std::size_t j = by_low[r];
      if (rank[j] > k) penalty += static_cast<double>(rank[j] - k);
    }
  }
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

/// Solves (X'X) b = X'y by Gaussian elimination with partial pivoting.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& X,
                                            const std::vector<double>& y) {
  const std::size_t p = X[0].size();
  std::vector<std::vector<double>> A(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < X.size(); ++r)
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) A[i][j] += X[r][i] * X[r][j];
      A[i][p] += X[r][i] * y[r];
    }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t j = c; j <= p; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<double> b(p);
  for (std::size_t i = 0; i < p; ++i) b[i] = A[i][p] / A[i][i];
  return b;
}

/// Inverse of a small symmetric positive definite matrix by Gauss-Jordan.
inline std::vector<std::vector<double>> invert(std::vector<std::vector<double>> A) {
  const std::size_t p = A.size();
  for (auto& row : A) row.resize(2 * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) A[i][p + i] = 1.0;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    const double d = A[c][c];
    for (auto& v : A[c]) v /= d;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = A[r][c];
      for (std::size_t j = 0; j < 2 * p; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<std::vector<double>> inv(p, std::vector<double>(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) inv[i][j] = A[i][p + j];
  return inv;
}

/// Two-sided Student-t tail probability P(|T| >= t) by composite Simpson
/// integration of the density over [0, |t|], after substituting
/// u = atan(x / sqrt(df)) to keep the integrand smooth and bounded.
inline double t_two_sided_p(double t, double df) {
  const double a = std::fabs(t);
  // density in u: c * cos(u)^(df - 1), where x = sqrt(df) tan(u)
  const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI) +
                       0.5 * std::log(df);
  const double upper = std::atan(a / std::sqrt(df));
  const int steps = 20000;
  const double h = upper / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double u = i * h;
    const double f = std::exp(log_c + (df - 1) * std::log(std::cos(u)));
    s += f * (i == 0 || i == steps ? 1 : (i % 2 ? 4 : 2));
  }
  const double half_mass = s * h / 3;  // P(0 <= T <= a)
  return std::clamp(1.0 - 2.0 * half_mass, 0.0, 1.0);
}

inline moralmap::Matrix read_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    cols = c;
    ++rows;
  }
  return moralmap::Matrix(rows, cols, std::move(values));
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(std::stoi(line));
  return out;
}

inline double read_number(const std::filesystem::path& path) {
  std::ifstream in(path);
  double v = 0;
  in >> v;
  return v;
}

/// Isotropic Gaussian blobs; returns points and truth labels.
inline std::pair<moralmap::Matrix, std::vector<int>> blobs(const std::vector<std::vector<double>>& centers,
                                                           std::size_t per_blob, double sigma,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t d = centers[0].size();
  moralmap::Matrix x(centers.size() * per_blob, d);
  std::vector<int> labels;
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per_blob; ++i) {
      const std::size_t r = c * per_blob + i;
      for (std::size_t j = 0; j < d; ++j) x(r, j) = centers[c][j] + noise(rng);
      labels.push_back(static_cast<int>(c));
    }
  return {x, labels};
}

}  // namespace oracle

#include "moralmap/reducer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "moralmap/parallel.hpp"

namespace moralmap {
namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr double kMinKDistScale = 1e-3;
constexpr double kGradClip = 4.0;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::mt19937_64 point_stream(std::uint64_t seed, std::size_t point) {
  return std::mt19937_64(mix64(seed ^ mix64(static_cast<std::uint64_t>(point) + 1)));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Row order by lexicographic value, ties by original index.
std::vector<std::size_t> canonical_order(const Matrix& x) {
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    for (std::size_t j = 0; j < ra.size(); ++j)
      if (ra[j] != rb[j]) return ra[j] < rb[j];
    return a < b;
  });
  return order;
}

std::size_t component_count(const FuzzyGraph& g) {
  std::vector<std::size_t> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t comps = g.n;
  for (const auto& e : g.edges) {
    const auto a = find(e.head), b = find(e.tail);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
      --comps;
    }
  }
  return comps;
}

// Rescales each coordinate to [0, 10].
void normalise_layout(Matrix& y) {
  for (std::size_t d = 0; d < y.cols(); ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      lo = std::min(lo, y(i, d));
      hi = std::max(hi, y(i, d));
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < y.rows(); ++i) y(i, d) = span > 0.0 ? 10.0 * (y(i, d) - lo) / span : 0.0;
  }
}

bool spectral_init(const FuzzyGraph& g, Matrix& y) {
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) w(static_cast<Eigen::Index>(e.head), static_cast<Eigen::Index>(e.tail)) = e.weight;
  Eigen::VectorXd inv_sqrt_deg = w.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(inv_sqrt_deg(i) > 0.0)) return false;
    inv_sqrt_deg(i) = 1.0 / std::sqrt(inv_sqrt_deg(i));
  }
  const Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) -
                              inv_sqrt_deg.asDiagonal() * w * inv_sqrt_deg.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) return false;
  const Eigen::MatrixXd vecs = solver.eigenvectors().middleCols(1, 2);
  double max_abs = 0.0;
  for (Eigen::Index d = 0; d < 2; ++d) {
    // Sign convention: the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::fabs(vecs(i, d)) > std::fabs(vecs(arg, d)) + 1e-15) arg = i;
    const double sign = vecs(arg, d) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      y(static_cast<std::size_t>(i), static_cast<std::size_t>(d)) = sign * vecs(i, d);
      max_abs = std::max(max_abs, std::fabs(vecs(i, d)));
    }
  }
  if (!(max_abs > 0.0) || !std::isfinite(max_abs)) return false;
  return true;
}

void random_init(std::uint64_t seed, Matrix& y) {
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto rng = point_stream(seed ^ 0xA5A5A5A5ull, i);
    for (std::size_t d = 0; d < y.cols(); ++d) y(i, d) = -10.0 + 20.0 * uniform01(rng);
  }
}

inline double clip(double v) noexcept { return std::clamp(v, -kGradClip, kGradClip); }

void optimize_layout(Matrix& y, const FuzzyGraph& g, const ReducerConfig& cfg, double a, double b) {
  const std::size_t n_edges = g.edges.size();
  if (n_edges == 0) return;
  double w_max = 0.0;
  for (const auto& e : g.edges) w_max = std::max(w_max, e.weight);

  const double n_epochs = static_cast<double>(cfg.n_epochs);
  std::vector<double> eps(n_edges, -1.0);
  for (std::size_t i = 0; i < n_edges; ++i) {
    // Edges too weak to be sampled once over the run are dropped.
    if (g.edges[i].weight < w_max / n_epochs) continue;
    eps[i] = w_max / g.edges[i].weight;
  }
  std::vector<double> eps_neg(n_edges);
  for (std::size_t i = 0; i < n_edges; ++i) eps_neg[i] = eps[i] / static_cast<double>(cfg.negative_sample_rate);
  std::vector<double> next = eps;
  std::vector<double> next_neg = eps_neg;

  std::vector<std::mt19937_64> streams;
  streams.reserve(g.n);
  for (std::size_t i = 0; i < g.n; ++i) streams.push_back(point_stream(cfg.seed, i));

  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    const double ep = static_cast<double>(epoch);
    const double alpha = cfg.learning_rate * (1.0 - ep / n_epochs);
    for (std::size_t i = 0; i < n_edges; ++i) {
      if (eps[i] <= 0.0 || next[i] > ep) continue;
      const std::size_t j = g.edges[i].head, k = g.edges[i].tail;
      auto cur = y.row(j);
      auto oth = y.row(k);
      double d2 = 0.0;
      for (std::size_t d = 0; d < 2; ++d) d2 += (cur[d] - oth[d]) * (cur[d] - oth[d]);
      double coeff = 0.0;
      if (d2 > 0.0) coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      for (std::size_t d = 0; d < 2; ++d) {
        const double grad = clip(coeff * (cur[d] - oth[d]));
        cur[d] += grad * alpha;
        oth[d] -= grad * alpha;
      }
      next[i] += eps[i];

      const auto n_neg = static_cast<std::size_t>(std::max(0.0, (ep - next_neg[i]) / eps_neg[i]));
      auto& rng = streams[j];
      for (std::size_t p = 0; p < n_neg; ++p) {
        const std::size_t s = static_cast<std::size_t>(rng() % g.n);
        const auto other = y.row(s);
        double nd2 = 0.0;
        for (std::size_t d = 0; d < 2; ++d) nd2 += (cur[d] - other[d]) * (cur[d] - other[d]);
        double rc = 0.0;
        if (nd2 > 0.0) {
          rc = 2.0 * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
        } else if (s == j) {
          continue;
        }
        for (std::size_t d = 0; d < 2; ++d) {
          const double grad = rc > 0.0 ? clip(rc * (cur[d] - other[d])) : kGradClip;
          cur[d] += grad * alpha;
        }
      }
      next_neg[i] += static_cast<double>(n_neg) * eps_neg[i];
    }
  }
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<double>> exact_knn(const Matrix& x, std::size_t k,
                                                                    Metric metric) {
  const std::size_t n = x.rows();
  k = std::min(k, n);
  std::vector<std::size_t> idx(n * k);
  std::vector<double> dist(n * k);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = {j == i ? 0.0 : distance(metric, x.row(i), x.row(j)), j};
    // Self first, then by distance, then index.
    auto less = [i](const auto& p, const auto& q) {
      if ((p.second == i) != (q.second == i)) return p.second == i;
      if (p.first != q.first) return p.first < q.first;
      return p.second < q.second;
    };
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(), less);
    for (std::size_t m = 0; m < k; ++m) {
      idx[i * k + m] = row[m].second;
      dist[i * k + m] = row[m].first;
    }
  });
  return {std::move(idx), std::move(dist)};
}

FuzzyGraph fuzzy_simplicial_set(const Matrix& x, std::size_t n_neighbors, Metric metric) {
  const std::size_t n = x.rows();
  const auto [idx, dist] = exact_knn(x, n_neighbors, metric);
  const std::size_t k = std::min(n_neighbors, n);
  const double target = std::log2(static_cast<double>(k));

  double mean_all = 0.0;
  for (double d : dist) mean_all += d;
  mean_all /= static_cast<double>(dist.size());

  std::vector<double> rho(n, 0.0), sigma(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &dist[i * k];
    for (std::size_t m = 0; m < k; ++m) {
      if (row[m] > 0.0) {
        rho[i] = row[m];
        break;
      }
    }
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double psum = 0.0;
      for (std::size_t m = 1; m < k; ++m) {
        const double d = row[m] - rho[i];
        psum += d > 0.0 ? std::exp(-(d / mid)) : 1.0;
      }
      if (std::fabs(psum - target) < kSmoothTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = (lo + hi) / 2.0;
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
      }
    }
    double mean_i = 0.0;
    for (std::size_t m = 0; m < k; ++m) mean_i += row[m];
    mean_i /= static_cast<double>(k);
    const double floor = kMinKDistScale * (rho[i] > 0.0 ? mean_i : mean_all);
    sigma[i] = std::max(mid, floor);
  }

  std::map<std::pair<std::size_t, std::size_t>, double> directed;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t j = idx[i * k + m];
      if (j == i) continue;
      const double d = dist[i * k + m] - rho[i];
      const double w = (d <= 0.0 || sigma[i] == 0.0) ? 1.0 : std::exp(-d / sigma[i]);
      directed[{i, j}] = w;
    }
  }

  FuzzyGraph g;
  g.n = n;
  std::map<std::pair<std::size_t, std::size_t>, double> sym;
  for (const auto& [key, w] : directed) {
    const auto rev = directed.find({key.second, key.first});
    const double wt = rev == directed.end() ? 0.0 : rev->second;
    const double u = w + wt - w * wt;
    sym[key] = u;
    sym[{key.second, key.first}] = u;
  }
  for (const auto& [key, w] : sym)
    if (w > 0.0) g.edges.push_back({key.first, key.second, w});
  return g;
}

std::pair<double, double> find_ab_params(double spread, double min_dist) {
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * static_cast<double>(i) / (kSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto residuals = [&](double a, double b, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    double sse = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double f = 1.0 / (1.0 + a * p);
      r(i) = f - ys[i];
      sse += r(i) * r(i);
      if (jac != nullptr) {
        (*jac)(i, 0) = -p * f * f;
        (*jac)(i, 1) = x > 0.0 ? -a * p * 2.0 * std::log(x) * f * f : 0.0;
      }
    }
    return sse;
  };

  // Levenberg-Marquardt from (1, 1).
  double a = 1.0, b = 1.0, lambda = 1e-3;
  Eigen::VectorXd r(kSamples), r_try(kSamples);
  Eigen::MatrixXd jac(kSamples, 2);
  double sse = residuals(a, b, r, &jac);
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() *= (1.0 + lambda);
    const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
    const double a_try = a + step(0), b_try = b + step(1);
    const double sse_try = residuals(a_try, b_try, r_try, nullptr);
    if (std::isfinite(sse_try) && sse_try < sse) {
      const bool converged = (sse - sse_try) <= 1e-15 * std::max(1.0, sse) && step.norm() < 1e-12;
      a = a_try;
      b = b_try;
      sse = residuals(a, b, r, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (converged) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return {a, b};
}

Matrix umap_fit(const Matrix& x, const ReducerConfig& cfg, Warnings* warnings) {
  const std::size_t n = x.rows();
  if (cfg.n_neighbors < 2) throw ValidationError("n_neighbors must be >= 2");
  if (n <= cfg.n_neighbors)
    throw ValidationError("umap needs more points (" + std::to_string(n) + ") than n_neighbors (" +
                          std::to_string(cfg.n_neighbors) + ")");
  if (!(cfg.min_dist >= 0.0)) throw ValidationError("min_dist must be >= 0");
  if (cfg.n_epochs == 0) throw ValidationError("n_epochs must be >= 1");
  for (double v : x.data())
    if (!std::isfinite(v)) throw ValidationError("umap input contains non-finite values");

  const auto order = canonical_order(x);
  Matrix xc(n, x.cols());
  for (std::size_t i = 0; i < n; ++i) std::copy_n(x.row(order[i]).begin(), x.cols(), xc.row(i).begin());

  Matrix out(n, ReducerConfig::target_dim, 0.0);
  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i)
    identical = std::equal(xc.row(i).begin(), xc.row(i).end(), xc.row(0).begin());
  if (identical) {
    warn(warnings, "umap input rows are all identical; layout collapsed to one point");
    return out;
  }

  const FuzzyGraph graph = fuzzy_simplicial_set(xc, cfg.n_neighbors, cfg.metric);
  Matrix y(n, ReducerConfig::target_dim);
  bool spectral = false;
  if (n > cfg.spectral_max_points) {
    warn(warnings, "too many points for dense spectral initialisation; using random initialisation");
  } else if (component_count(graph) != 1) {
    warn(warnings, "neighbour graph is disconnected; using random initialisation");
  } else {
    spectral = spectral_init(graph, y);
    if (!spectral) warn(warnings, "spectral initialisation failed; using random initialisation");
  }
  if (!spectral) random_init(cfg.seed, y);
  normalise_layout(y);

  const auto [a, b] = find_ab_params(cfg.spread, cfg.min_dist);
  optimize_layout(y, graph, cfg, a, b);

  for (std::size_t i = 0; i < n; ++i) {
    out(order[i], 0) = y(i, 0);
    out(order[i], 1) = y(i, 1);
  }
  return out;
}

}  // namespace moralmap

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "moralmap/error.hpp"
#include "moralmap/matrix.hpp"
#include "moralmap/metric.hpp"

namespace moralmap {

struct ReducerConfig {
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  std::size_t n_epochs = 500;
  std::uint64_t seed = 0;
  std::size_t negative_sample_rate = 5;
  double learning_rate = 1.0;
  Metric metric = Metric::euclidean;
  /// Dense spectral initialisation is used up to this many points; larger
  /// inputs start from the seeded random layout.
  std::size_t spectral_max_points = 3000;

  static constexpr std::size_t target_dim = 2;
};

/// Symmetric fuzzy neighbourhood graph as a COO list holding both (i, j)
/// and (j, i), sorted by (head, tail).
struct FuzzyGraph {
  struct Edge {
    std::size_t head;
    std::size_t tail;
    double weight;
  };
  std::size_t n = 0;
  std::vector<Edge> edges;
};

/// Exact k nearest neighbours (self included first); distance ties break by
/// index. Returns (indices, distances), each n x k row-major.
std::pair<std::vector<std::size_t>, std::vector<double>> exact_knn(const Matrix& x, std::size_t k,
                                                                    Metric metric);

/// Smooth-kNN calibration and fuzzy union: per point, rho is the distance to
/// the nearest non-identical neighbour and sigma solves
/// sum_j exp(-(d_ij - rho) / sigma) = log2(k); memberships are then combined
/// as P + P^T - P o P^T.
FuzzyGraph fuzzy_simplicial_set(const Matrix& x, std::size_t n_neighbors, Metric metric);

/// Fits 1 / (1 + a d^(2b)) to the min_dist/spread target curve.
std::pair<double, double> find_ab_params(double spread, double min_dist);

/// 2-D layout of the rows of `x`. Rows are processed in a canonical order
/// (lexicographic by value) and every point owns an RNG stream keyed by
/// (seed, canonical index), so the result is bit-identical for identical
/// input and permuting distinct input rows permutes the output rows.
/// Throws ValidationError when n <= n_neighbors or n_neighbors < 2.
Matrix umap_fit(const Matrix& x, const ReducerConfig& config, Warnings* warnings = nullptr);

}  // namespace moralmap

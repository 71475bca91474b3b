#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "moralmap/kernels.hpp"

namespace moralmap {

enum class Metric { euclidean, manhattan, cosine };

std::string_view metric_name(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;

/// Distance under `metric`; cosine distance is 1 - cos(a, b).
inline double distance(Metric metric, std::span<const double> a, std::span<const double> b) noexcept {
  switch (metric) {
    case Metric::euclidean:
      return std::sqrt(kernels::squared_euclidean(a, b));
    case Metric::manhattan:
      return kernels::manhattan(a, b);
    case Metric::cosine: {
      const double denom = std::sqrt(kernels::squared_norm(a) * kernels::squared_norm(b));
      if (denom == 0.0) return 1.0;
      return 1.0 - kernels::dot(a, b) / denom;
    }
  }
  return 0.0;
}

}  // namespace moralmap

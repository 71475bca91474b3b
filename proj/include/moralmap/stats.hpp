#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace moralmap::stats {

inline double mean(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
inline double sample_sd(std::span<const double> x) noexcept {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// A spread this small relative to the data's magnitude is rounding noise.
inline bool degenerate_spread(std::span<const double> x, double sd) noexcept {
  double scale = 1.0;
  for (double v : x) scale = std::max(scale, std::fabs(v));
  return !(sd > 1e-12 * scale);
}

}  // namespace moralmap::stats

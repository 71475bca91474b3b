#include "moralmap/metric.hpp"

namespace moralmap {

std::string_view metric_name(Metric metric) noexcept {
  switch (metric) {
    case Metric::euclidean:
      return "euclidean";
    case Metric::manhattan:
      return "manhattan";
    case Metric::cosine:
      return "cosine";
  }
  return "euclidean";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "manhattan") return Metric::manhattan;
  if (name == "cosine" || name == "cosine_distance") return Metric::cosine;
  return std::nullopt;
}

}  // namespace moralmap

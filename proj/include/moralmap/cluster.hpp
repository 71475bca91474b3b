#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moralmap/error.hpp"
#include "moralmap/identity.hpp"
#include "moralmap/matrix.hpp"
#include "moralmap/metric.hpp"

namespace moralmap {

struct ClusteringParams {
  std::size_t min_samples = 15;
  std::size_t min_cluster_size = 15;
  Metric metric = Metric::euclidean;

  /// Named presets: "communal-default" (15, 15, manhattan) and
  /// "agency-default" (15, 150, euclidean).
  static std::optional<ClusteringParams> preset(std::string_view name);
  void validate() const;
  friend bool operator==(const ClusteringParams&, const ClusteringParams&) = default;
};

enum class NarrativeLabel {
  educate_inform,
  educate_inspire,
  fight_protest,
  fight_convert,
  goodhealth_personal,
  goodhealth_benefits,
  choose_personal,
  choose_discuss,
  other,
};

std::string_view narrative_name(NarrativeLabel l) noexcept;
std::optional<NarrativeLabel> parse_narrative(std::string_view s) noexcept;
/// Communal clusters take educate_* / fight_* / other; agency clusters take
/// goodhealth_* / choose_* / other.
bool narrative_compatible(NarrativeLabel l, Orientation o) noexcept;

struct ClusterModel {
  std::vector<int> labels;  // -1 is noise
  int n_clusters = 0;
  ClusteringParams params;
  std::optional<double> dbcv;
  std::map<int, NarrativeLabel> narrative_labels;

  std::vector<std::size_t> cluster_sizes() const;
  double noise_fraction() const;
};

/// HDBSCAN: core distance to the min_samples-th neighbour (self included),
/// mutual-reachability MST, single-linkage hierarchy, condensed tree at
/// min_cluster_size, excess-of-mass selection (the root is never selected).
/// Labels are numbered in order of condensed-tree cluster id.
ClusterModel hdbscan(const Matrix& points, const ClusteringParams& params);

/// Thrown when DBCV is undefined (fewer than two clusters, or a cluster with
/// fewer than two points).
class UndefinedScoreError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Density-Based Clustering Validation index in [-1, 1]. Noise points count
/// towards the weighting denominator only.
double dbcv(const Matrix& points, std::span<const int> labels, Metric metric = Metric::euclidean);

struct SearchSpace {
  std::vector<std::size_t> min_samples;
  std::vector<std::size_t> min_cluster_size;
  std::vector<Metric> metrics;

  /// min_samples in [5, 30], min_cluster_size in [15, 200], both metrics.
  static SearchSpace defaults();
  static std::vector<std::size_t> range(std::size_t lo, std::size_t hi);
  std::size_t cardinality() const noexcept;
};

struct Trial {
  ClusteringParams params;
  std::optional<double> dbcv;
  int n_clusters = 0;
  double noise_fraction = 0.0;
};

struct SearchResult {
  ClusteringParams best;
  ClusterModel model;
  std::vector<Trial> log;
};

/// Evaluates `trials` distinct parameter sets (the whole space when it is no
/// larger) and returns the one with maximal DBCV; undefined scores rank
/// below every defined score and ties go to the earlier trial. DBCV uses
/// each trial's own metric. Throws SearchFailure when no trial is defined.
SearchResult random_search(const Matrix& points, const SearchSpace& space, std::size_t trials,
                           std::uint64_t seed);

class SearchFailure : public std::runtime_error {
 public:
  SearchFailure(const std::string& what, std::vector<Trial> log)
      : std::runtime_error(what), log_(std::move(log)) {}
  const std::vector<Trial>& log() const noexcept { return log_; }

 private:
  std::vector<Trial> log_;
};

void write_trial_log(std::ostream& out, const std::vector<Trial>& log);

/// Label-mapping file: "cluster_id<TAB>narrative_label" per line; '#'
/// comments and blank lines are skipped.
std::map<int, NarrativeLabel> read_label_mapping(const std::filesystem::path& path);
std::map<int, NarrativeLabel> parse_label_mapping(std::istream& in);

/// Attaches labels; throws ValidationError for unknown cluster ids or labels
/// incompatible with `orientation`.
ClusterModel apply_narrative_labels(ClusterModel model, const std::map<int, NarrativeLabel>& mapping,
                                    Orientation orientation);

/// Cluster file: id,label,narrative_label.
void write_cluster_file(std::ostream& out, std::span<const std::string> ids, const ClusterModel& model);

}  // namespace moralmap

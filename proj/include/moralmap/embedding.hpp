#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "moralmap/corpus.hpp"
#include "moralmap/error.hpp"
#include "moralmap/matrix.hpp"
#include "moralmap/metric.hpp"

namespace moralmap {

/// Externally produced sentence embeddings, one row per id.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Throws DataError on a dimension mismatch or a duplicate id.
  void add(std::string id, std::span<const double> values);

  bool contains(const std::string& id) const { return index_.contains(id); }
  std::span<const double> at(const std::string& id) const;
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LoadedEmbeddings {
  EmbeddingTable table;
  std::vector<RecordError> errors;  // zero vectors
};

/// Reads "id,v0,...,v{d-1}" rows; an optional header starting with "id," is
/// detected and skipped. d comes from the first data row. Arity mismatch,
/// non-finite values and duplicate ids throw DataError naming the row;
/// zero vectors are record errors.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path);
LoadedEmbeddings parse_embeddings(std::istream& in);

/// u.v / (|u| |v|). Throws DomainError on zero norm or dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// Cosine between the video vector and the unweighted mean of its comment
/// vectors.
double video_comment_alignment(std::span<const double> video,
                               const std::vector<std::span<const double>>& comments);

inline constexpr int kNoise = -1;

struct SilhouetteReport {
  /// Per input point; nullopt for noise-labelled points.
  std::vector<std::optional<double>> scores;
  /// Mean score per cluster label (ascending labels).
  std::vector<std::pair<int, double>> cluster_means;
  double overall = 0.0;
};

/// s = (b - a) / max(a, b) for every non-noise point. Singleton clusters
/// score 0. With fewer than two clusters every score is 0 and a warning is
/// emitted.
SilhouetteReport silhouette(const Matrix& points, std::span<const int> labels,
                            Metric metric = Metric::cosine, Warnings* warnings = nullptr);

/// Ids of the (at most k) points nearest the component-wise centroid under
/// euclidean distance; distance ties break by id.
std::vector<std::string> top_k_central(const Matrix& points, std::span<const std::string> ids,
                                       std::size_t k = 30);

}  // namespace moralmap

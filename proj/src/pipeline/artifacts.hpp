#pragma once
// File layout of the output directory and small readers for the CSV
// artifacts that stages hand to each other.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "moralmap/cluster.hpp"
#include "moralmap/corpus.hpp"
#include "moralmap/identity.hpp"
#include "moralmap/matrix.hpp"

namespace moralmap::artifacts {

namespace fs = std::filesystem;

struct Layout {
  explicit Layout(fs::path root) : root(std::move(root)) {}
  fs::path root;

  fs::path corpus() const { return root / "corpus.jsonl"; }
  fs::path ingest_errors() const { return root / "ingest_errors.jsonl"; }
  fs::path preprocessed() const { return root / "preprocessed.jsonl"; }
  fs::path ids(std::string_view name) const { return root / "ids" / (std::string(name) + ".txt"); }
  fs::path topics_dir() const { return root / "topics"; }
  fs::path ci() const { return root / "ci.csv"; }
  fs::path moral_raw() const { return root / "moral" / "raw.csv"; }
  fs::path moral_adjusted() const { return root / "moral" / "adjusted.csv"; }
  fs::path moral_errors() const { return root / "moral" / "errors.jsonl"; }
  fs::path layout(Orientation o) const { return root / "layout" / (std::string(orientation_name(o)) + ".csv"); }
  fs::path clusters(Orientation o) const {
    return root / "clusters" / (std::string(orientation_name(o)) + ".csv");
  }
  fs::path cluster_meta(Orientation o) const {
    return root / "clusters" / (std::string(orientation_name(o)) + ".json");
  }
  fs::path trials(Orientation o) const {
    return root / "clusters" / ("trials_" + std::string(orientation_name(o)) + ".jsonl");
  }
  fs::path annotation_dir(Orientation o) const { return root / "annotation" / std::string(orientation_name(o)); }
  fs::path coherence() const { return root / "coherence.csv"; }
  fs::path embedding_layout() const { return root / "embedding_layout.csv"; }
  fs::path alignment() const { return root / "alignment.csv"; }
  fs::path ca_comments() const { return root / "ca" / "comments.csv"; }
  fs::path ca_videos() const { return root / "ca" / "videos.csv"; }
  fs::path regression_table() const { return root / "regression" / "variables.csv"; }
  fs::path regression_result() const { return root / "regression" / "coefficients.csv"; }
  fs::path regression_meta() const { return root / "regression" / "fit.json"; }
  fs::path warnings(std::string_view stage) const {
    return root / "warnings" / (std::string(stage) + ".txt");
  }
  fs::path report() const { return root / "report.json"; }
  fs::path figures() const { return root / "figures"; }
};

/// Header-indexed CSV rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  const std::string& get(std::size_t row, std::string_view name) const { return rows[row][column(name)]; }
  double number(std::size_t row, std::string_view name) const;
};

/// Throws DataError when the file is missing, naming the stage that makes it.
Table read_table(const fs::path& path, std::string_view producer);

void write_ids(const fs::path& path, const std::vector<std::string>& ids);
std::vector<std::string> read_ids(const fs::path& path, std::string_view producer);
std::set<std::string> read_id_set(const fs::path& path, std::string_view producer);

void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

/// FNV-1a; used only to key resumable results.
std::uint64_t fingerprint(std::string_view data, std::uint64_t h = 14695981039346656037ull);
std::string hex(std::uint64_t v);

/// Stream of the pipeline seed dedicated to one use.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

/// Orientation per video id from ci.csv.
std::map<std::string, Orientation> read_orientations(const Layout& l);

/// Ids and coordinates of one orientation's layout.
std::pair<std::vector<std::string>, Matrix> read_layout(const Layout& l, Orientation o);

/// Cluster labels, parameters and narrative labels of one orientation,
/// aligned with `ids`.
ClusterModel read_cluster_model(const Layout& l, Orientation o, const std::vector<std::string>& ids);

/// Video records by id from preprocessed.jsonl, and comments per video.
struct Preprocessed {
  std::map<std::string, VideoDoc> videos;
  std::map<std::string, std::vector<Comment>> comments;
};
Preprocessed read_preprocessed(const Layout& l);

}  // namespace moralmap::artifacts

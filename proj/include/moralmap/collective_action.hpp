#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "moralmap/error.hpp"

namespace moralmap {

/// Wildcard dictionary: literal words plus stems written with a trailing '*'.
class CADictionary {
 public:
  /// Throws ValidationError on an empty list, an interior or lone '*', or a
  /// duplicate pattern.
  explicit CADictionary(std::vector<std::string> patterns);

  const std::vector<std::string>& patterns() const noexcept { return patterns_; }
  std::size_t size() const noexcept { return patterns_.size(); }
  bool matches(std::string_view token) const;

 private:
  std::vector<std::string> patterns_;
  std::unordered_set<std::string> literals_;
  std::unordered_set<std::string> stems_;
  std::size_t max_stem_ = 0;
};

/// One pattern per line, lowercased; blank lines and lines starting with '#'
/// are skipped.
CADictionary compile_dictionary(const std::filesystem::path& path);
CADictionary parse_dictionary(std::istream& in);

/// The dictionary file shipped in the data directory.
std::filesystem::path default_dictionary_path();

struct CommentCA {
  std::size_t matched = 0;
  std::size_t total = 0;
  double frequency = 0.0;
  bool has_marker = false;
};

CommentCA ca_frequency(std::string_view text, const CADictionary& dict);

struct VideoCA {
  std::size_t n_comments = 0;
  double mean_frequency = 0.0;
  double marker_fraction = 0.0;
};

/// Mean comment frequency and the fraction of comments with a match.
/// Returns nothing (and warns) for a video without comments.
std::optional<VideoCA> video_ca_stats(std::span<const CommentCA> comments,
                                      Warnings* warnings = nullptr);

/// id,n_comments,mean_ca_freq,marker_fraction
void write_video_ca(std::ostream& out, const std::map<std::string, VideoCA>& stats);

}  // namespace moralmap

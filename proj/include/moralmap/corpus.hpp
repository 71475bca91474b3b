#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace moralmap {

enum class Challenge { veganuary, meatless_march, no_meat_may, baseline };
enum class TranscriptSource { captions, asr, unknown };

std::string_view challenge_name(Challenge c) noexcept;
std::optional<Challenge> parse_challenge(std::string_view s) noexcept;
std::string_view transcript_source_name(TranscriptSource s) noexcept;
std::optional<TranscriptSource> parse_transcript_source(std::string_view s) noexcept;

/// RFC 3339 timestamp; keeps the original spelling for lossless round trips.
struct Timestamp {
  std::string text;
  std::chrono::sys_seconds utc{};

  int year() const;
  friend bool operator==(const Timestamp& a, const Timestamp& b) { return a.text == b.text; }
};

/// Returns nullopt unless `s` is a valid RFC 3339 date-time.
std::optional<Timestamp> parse_rfc3339(std::string_view s);

struct VideoDoc {
  std::string id;
  Challenge challenge = Challenge::veganuary;
  Timestamp published_at;
  std::string title;
  std::string description;
  std::string transcript;
  std::string lang;
  TranscriptSource transcript_source = TranscriptSource::unknown;

  friend bool operator==(const VideoDoc&, const VideoDoc&) = default;
};

struct Comment {
  std::string id;
  std::string video_id;
  std::string text;
  Timestamp published_at;

  friend bool operator==(const Comment&, const Comment&) = default;
};

struct Corpus {
  std::vector<VideoDoc> videos;
  std::vector<Comment> comments;
};

/// One rejected input line.
struct RecordError {
  std::size_t line = 0;
  std::string reason;
};

struct ParsedCorpus {
  Corpus corpus;
  std::vector<RecordError> errors;
};

inline constexpr std::size_t kMaxCommentsPerVideo = 1000;

/// Parses newline-delimited corpus records. Malformed records (bad JSON,
/// missing or invalid fields, dangling video_id, more than 1000 comments on
/// one video) land in the error report; unreadable input and duplicate ids
/// throw DataError.
ParsedCorpus parse_corpus(const std::filesystem::path& path);
ParsedCorpus parse_corpus(std::istream& in);

std::string serialize_record(const VideoDoc& v);
std::string serialize_record(const Comment& c);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
void write_error_report(std::ostream& out, const std::vector<RecordError>& errors);

/// Removes every [...] span whose content mentions "music" (any case), then
/// normalizes whitespace.
std::string preprocess_transcript(std::string_view text);

/// Drops "@mention" tokens and URL tokens (scheme:// or www.), then
/// normalizes whitespace.
std::string preprocess_comment(std::string_view text);

/// True iff `text` has at least `min_unique` distinct case-folded words.
bool passes_unique_word_filter(std::string_view text, std::size_t min_unique = 5);

/// Most frequent description tokens, excluding stopwords, seeds and the
/// hashtag forms of seeds. Ties break lexicographically.
std::vector<std::pair<std::string, std::size_t>> expand_keywords(const std::vector<VideoDoc>& videos,
                                                                 const std::set<std::string>& seeds,
                                                                 std::size_t k = 10);

/// Keyword file: one keyword per line, '#'-prefixed lines are comments.
/// Hashtag keywords are written as-is; a line is a comment only when '#'
/// is followed by a space or the line is a lone '#'.
std::vector<std::string> read_keyword_file(const std::filesystem::path& path);
std::vector<std::string> parse_keyword_lines(std::istream& in);
void write_keyword_file(std::ostream& out, const std::vector<std::string>& keywords,
                        std::string_view header_comment = {});

/// Per-challenge, per-year video and comment counts at successive filter
/// stages.
class CorpusStats {
 public:
  struct Cell {
    std::size_t videos = 0;
    std::size_t comments = 0;
  };
  using Key = std::pair<Challenge, int>;

  explicit CorpusStats(std::vector<std::string> stage_names);

  /// Appends a stage count; stages must be recorded in declaration order.
  void record(std::size_t stage, const std::vector<VideoDoc>& videos,
              const std::vector<Comment>& comments);

  const std::vector<std::string>& stages() const noexcept { return stages_; }
  Cell at(std::size_t stage, Key key) const;
  Cell total(std::size_t stage) const;
  std::set<Key> keys() const;

  /// True when every (challenge, year) count is non-increasing across stages.
  bool monotone() const;

  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> stages_;
  std::vector<std::map<Key, Cell>> cells_;
};

}  // namespace moralmap

#include "moralmap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "moralmap/error.hpp"
#include "moralmap/text.hpp"

namespace moralmap {
namespace {

using ordered_json = nlohmann::ordered_json;

bool digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return false;
  for (std::size_t i = pos; i < pos + n; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

int number(std::string_view s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

// Field lookup helpers; each throws a std::string describing the violation.
std::string required_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::string("missing field '") + key + "'";
  if (!it->is_string()) throw std::string("field '") + key + "' is not a string";
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw std::string("field '") + key + "' is not a string";
  return it->get<std::string>();
}

Timestamp required_timestamp(const nlohmann::json& j) {
  const std::string raw = required_string(j, "published_at");
  auto ts = parse_rfc3339(raw);
  if (!ts) throw std::string("invalid RFC 3339 timestamp '") + raw + "'";
  return *ts;
}

VideoDoc video_from_json(const nlohmann::json& j) {
  VideoDoc v;
  v.id = required_string(j, "id");
  if (v.id.empty()) throw std::string("empty id");
  const std::string ch = required_string(j, "challenge");
  const auto challenge = parse_challenge(ch);
  if (!challenge) throw "unknown challenge '" + ch + "'";
  v.challenge = *challenge;
  v.published_at = required_timestamp(j);
  v.title = optional_string(j, "title");
  v.description = optional_string(j, "description");
  v.transcript = required_string(j, "text");
  v.lang = required_string(j, "lang");
  if (v.lang.empty()) throw std::string("empty lang");
  const std::string src = optional_string(j, "transcript_source");
  if (!src.empty()) {
    const auto parsed = parse_transcript_source(src);
    if (!parsed) throw "unknown transcript_source '" + src + "'";
    v.transcript_source = *parsed;
  }
  return v;
}

Comment comment_from_json(const nlohmann::json& j) {
  Comment c;
  c.id = required_string(j, "id");
  if (c.id.empty()) throw std::string("empty id");
  c.video_id = required_string(j, "video_id");
  c.text = required_string(j, "text");
  c.published_at = required_timestamp(j);
  return c;
}

bool is_url_token(std::string_view tok) {
  const std::string lower = text::to_lower_ascii(tok);
  if (lower.starts_with("www.")) return true;
  const auto pos = lower.find("://");
  if (pos == std::string::npos || pos == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(lower[0]))) return false;
  return std::all_of(lower.begin(), lower.begin() + static_cast<std::ptrdiff_t>(pos), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-';
  });
}

// Lowercased description token with surrounding punctuation removed; a
// leading '#' survives.
std::string keyword_token(std::string_view raw) {
  std::string tok = text::to_lower_ascii(raw);
  const bool hashtag = !tok.empty() && tok.front() == '#';
  std::size_t b = hashtag ? 1 : 0;
  std::size_t e = tok.size();
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (b < e && punct(tok[b])) ++b;
  while (e > b && punct(tok[e - 1])) --e;
  if (b == e) return {};
  return (hashtag ? "#" : "") + tok.substr(b, e - b);
}

}  // namespace

std::string_view challenge_name(Challenge c) noexcept {
  switch (c) {
    case Challenge::veganuary:
      return "veganuary";
    case Challenge::meatless_march:
      return "meatless_march";
    case Challenge::no_meat_may:
      return "no_meat_may";
    case Challenge::baseline:
      return "baseline";
  }
  return "baseline";
}

std::optional<Challenge> parse_challenge(std::string_view s) noexcept {
  if (s == "veganuary") return Challenge::veganuary;
  if (s == "meatless_march") return Challenge::meatless_march;
  if (s == "no_meat_may") return Challenge::no_meat_may;
  if (s == "baseline") return Challenge::baseline;
  return std::nullopt;
}

std::string_view transcript_source_name(TranscriptSource s) noexcept {
  switch (s) {
    case TranscriptSource::captions:
      return "captions";
    case TranscriptSource::asr:
      return "asr";
    case TranscriptSource::unknown:
      return "unknown";
  }
  return "unknown";
}

std::optional<TranscriptSource> parse_transcript_source(std::string_view s) noexcept {
  if (s == "captions") return TranscriptSource::captions;
  if (s == "asr") return TranscriptSource::asr;
  if (s == "unknown") return TranscriptSource::unknown;
  return std::nullopt;
}

int Timestamp::year() const {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(utc)};
  return static_cast<int>(ymd.year());
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)
  if (!digits(s, 0, 4) || s.size() < 20 || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' ||
      !digits(s, 8, 2) || (s[10] != 'T' && s[10] != 't') || !digits(s, 11, 2) || s[13] != ':' ||
      !digits(s, 14, 2) || s[16] != ':' || !digits(s, 17, 2))
    return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;
  }
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    if (!digits(s, pos + 1, 2) || pos + 3 >= s.size() || s[pos + 3] != ':' || !digits(s, pos + 4, 2))
      return std::nullopt;
    const int h = number(s, pos + 1, 2);
    const int m = number(s, pos + 4, 2);
    if (h > 23 || m > 59) return std::nullopt;
    offset_minutes = (s[pos] == '+' ? 1 : -1) * (h * 60 + m);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{number(s, 0, 4)}, month{static_cast<unsigned>(number(s, 5, 2))},
                           day{static_cast<unsigned>(number(s, 8, 2))}};
  const int hh = number(s, 11, 2), mm = number(s, 14, 2), ss = number(s, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  Timestamp ts;
  ts.text = std::string(s);
  ts.utc = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
  return ts;
}

ParsedCorpus parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file: " + path.string());
  return parse_corpus(in);
}

ParsedCorpus parse_corpus(std::istream& in) {
  ParsedCorpus out;
  std::unordered_set<std::string> ids;
  std::vector<std::pair<std::size_t, Comment>> pending;

  auto claim_id = [&](const std::string& id, std::size_t line) {
    if (!ids.insert(id).second)
      throw DataError("duplicate id '" + id + "' at line " + std::to_string(line));
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw std::string("record is not an object");
      const std::string kind = required_string(j, "kind");
      if (kind == "video") {
        VideoDoc v = video_from_json(j);
        claim_id(v.id, lineno);
        out.corpus.videos.push_back(std::move(v));
      } else if (kind == "comment") {
        Comment c = comment_from_json(j);
        claim_id(c.id, lineno);
        pending.emplace_back(lineno, std::move(c));
      } else {
        throw "unknown kind '" + kind + "'";
      }
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({lineno, std::string("malformed JSON: ") + e.what()});
    } catch (const std::string& reason) {
      out.errors.push_back({lineno, reason});
    }
  }
  if (in.bad()) throw DataError("I/O error while reading corpus");

  std::unordered_map<std::string, std::size_t> per_video;
  for (const auto& v : out.corpus.videos) per_video.emplace(v.id, 0);
  for (auto& [ln, c] : pending) {
    const auto it = per_video.find(c.video_id);
    if (it == per_video.end()) {
      out.errors.push_back({ln, "comment references unknown video '" + c.video_id + "'"});
    } else if (++it->second > kMaxCommentsPerVideo) {
      out.errors.push_back({ln, "more than 1000 comments for video '" + c.video_id + "'"});
    } else {
      out.corpus.comments.push_back(std::move(c));
    }
  }
  std::sort(out.errors.begin(), out.errors.end(),
            [](const RecordError& a, const RecordError& b) { return a.line < b.line; });
  return out;
}

std::string serialize_record(const VideoDoc& v) {
  ordered_json j;
  j["kind"] = "video";
  j["id"] = v.id;
  j["challenge"] = challenge_name(v.challenge);
  j["published_at"] = v.published_at.text;
  j["title"] = v.title;
  j["description"] = v.description;
  j["text"] = v.transcript;
  j["lang"] = v.lang;
  j["transcript_source"] = transcript_source_name(v.transcript_source);
  return j.dump();
}

std::string serialize_record(const Comment& c) {
  ordered_json j;
  j["kind"] = "comment";
  j["id"] = c.id;
  j["video_id"] = c.video_id;
  j["published_at"] = c.published_at.text;
  j["text"] = c.text;
  return j.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& v : corpus.videos) out << serialize_record(v) << '\n';
  for (const auto& c : corpus.comments) out << serialize_record(c) << '\n';
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_corpus(out, corpus);
}

void write_error_report(std::ostream& out, const std::vector<RecordError>& errors) {
  for (const auto& e : errors) {
    ordered_json j;
    j["line"] = e.line;
    j["reason"] = e.reason;
    out << j.dump() << '\n';
  }
}

std::string preprocess_transcript(std::string_view s) {
  std::string kept;
  kept.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '[') {
      const auto close = s.find(']', i + 1);
      if (close != std::string_view::npos) {
        const std::string inner = text::to_lower_ascii(s.substr(i + 1, close - i - 1));
        if (inner.find("music") != std::string::npos) {
          kept.push_back(' ');
          i = close + 1;
          continue;
        }
      }
    }
    kept.push_back(s[i]);
    ++i;
  }
  return text::collapse_whitespace(kept);
}

std::string preprocess_comment(std::string_view s) {
  std::string out;
  for (std::string_view tok : text::split_whitespace(s)) {
    if (tok.front() == '@' || is_url_token(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

bool passes_unique_word_filter(std::string_view s, std::size_t min_unique) {
  if (min_unique < 1) throw ValidationError("min_unique must be >= 1");
  const auto tokens = text::word_tokens(s);
  const std::unordered_set<std::string> unique(tokens.begin(), tokens.end());
  return unique.size() >= min_unique;
}

std::vector<std::pair<std::string, std::size_t>> expand_keywords(const std::vector<VideoDoc>& videos,
                                                                 const std::set<std::string>& seeds,
                                                                 std::size_t k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::unordered_set<std::string> excluded;
  for (const auto& seed : seeds) {
    std::string bare = text::to_lower_ascii(text::trim(seed));
    if (!bare.empty() && bare.front() == '#') bare.erase(0, 1);
    std::string joined = bare;
    std::erase(joined, ' ');
    for (const auto& form : {bare, joined}) {
      excluded.insert(form);
      excluded.insert("#" + form);
    }
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& v : videos) {
    for (std::string_view raw : text::split_whitespace(v.description)) {
      std::string tok = keyword_token(raw);
      if (tok.empty() || excluded.contains(tok) || text::is_stopword(tok)) continue;
      ++counts[std::move(tok)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::vector<std::string> read_keyword_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read keyword file: " + path.string());
  return parse_keyword_lines(in);
}

std::vector<std::string> parse_keyword_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t == "#" || t.starts_with("# ") || t.starts_with("#\t")) continue;
    out.emplace_back(t);
  }
  return out;
}

void write_keyword_file(std::ostream& out, const std::vector<std::string>& keywords,
                        std::string_view header_comment) {
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (const auto& kw : keywords) out << kw << '\n';
}

CorpusStats::CorpusStats(std::vector<std::string> stage_names) : stages_(std::move(stage_names)) {}

void CorpusStats::record(std::size_t stage, const std::vector<VideoDoc>& videos,
                         const std::vector<Comment>& comments) {
  if (stage != cells_.size() || stage >= stages_.size())
    throw std::logic_error("corpus stats stages must be recorded in order");
  std::map<Key, Cell> cells;
  std::unordered_map<std::string, Key> video_key;
  for (const auto& v : videos) {
    const Key key{v.challenge, v.published_at.year()};
    ++cells[key].videos;
    video_key.emplace(v.id, key);
  }
  for (const auto& c : comments) {
    const auto it = video_key.find(c.video_id);
    if (it != video_key.end()) ++cells[it->second].comments;
  }
  cells_.push_back(std::move(cells));
}

CorpusStats::Cell CorpusStats::at(std::size_t stage, Key key) const {
  const auto it = cells_.at(stage).find(key);
  return it == cells_.at(stage).end() ? Cell{} : it->second;
}

CorpusStats::Cell CorpusStats::total(std::size_t stage) const {
  Cell sum;
  for (const auto& [key, cell] : cells_.at(stage)) {
    sum.videos += cell.videos;
    sum.comments += cell.comments;
  }
  return sum;
}

std::set<CorpusStats::Key> CorpusStats::keys() const {
  std::set<Key> out;
  for (const auto& stage : cells_)
    for (const auto& [key, cell] : stage) out.insert(key);
  return out;
}

bool CorpusStats::monotone() const {
  for (const auto& key : keys()) {
    for (std::size_t s = 1; s < cells_.size(); ++s) {
      const Cell prev = at(s - 1, key), cur = at(s, key);
      if (cur.videos > prev.videos || cur.comments > prev.comments) return false;
    }
  }
  return true;
}

void CorpusStats::write_csv(std::ostream& out) const {
  out << "challenge,year,stage,videos,comments\n";
  for (const auto& key : keys()) {
    for (std::size_t s = 0; s < cells_.size(); ++s) {
      const Cell c = at(s, key);
      out << challenge_name(key.first) << ',' << key.second << ',' << stages_[s] << ','
          << c.videos << ',' << c.comments << '\n';
    }
  }
}

}  // namespace moralmap

#include "moralmap/collective_action.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "moralmap/format.hpp"
#include "moralmap/text.hpp"

namespace moralmap {

CADictionary::CADictionary(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw ValidationError("collective-action dictionary is empty");
  for (const auto& p : patterns_) {
    const auto star = p.find('*');
    if (p.empty() || p == "*" || (star != std::string::npos && star + 1 != p.size()))
      throw ValidationError("invalid dictionary pattern '" + p + "': '*' is only allowed at the end of a stem");
    const bool fresh = star == std::string::npos ? literals_.insert(p).second
                                                 : stems_.insert(p.substr(0, star)).second;
    if (!fresh) throw ValidationError("duplicate dictionary pattern '" + p + "'");
    if (star != std::string::npos) max_stem_ = std::max(max_stem_, star);
  }
}

bool CADictionary::matches(std::string_view token) const {
  if (literals_.contains(std::string(token))) return true;
  std::string prefix;
  for (std::size_t len = 1; len <= std::min(max_stem_, token.size()); ++len) {
    prefix.assign(token.substr(0, len));
    if (stems_.contains(prefix)) return true;
  }
  return false;
}

CADictionary parse_dictionary(std::istream& in) {
  std::vector<std::string> patterns;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    patterns.push_back(text::to_lower_ascii(t));
  }
  return CADictionary(std::move(patterns));
}

CADictionary compile_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read dictionary " + path.string());
  return parse_dictionary(in);
}

std::filesystem::path default_dictionary_path() {
  return std::filesystem::path(MORALMAP_DATA_DIR) / "collective_action.dic";
}

CommentCA ca_frequency(std::string_view text, const CADictionary& dict) {
  CommentCA out;
  for (const auto& tok : text::word_tokens(text)) {
    ++out.total;
    if (dict.matches(tok)) ++out.matched;
  }
  if (out.total > 0) out.frequency = static_cast<double>(out.matched) / static_cast<double>(out.total);
  out.has_marker = out.matched > 0;
  return out;
}

std::optional<VideoCA> video_ca_stats(std::span<const CommentCA> comments, Warnings* warnings) {
  if (comments.empty()) {
    warn(warnings, "video without comments excluded from collective-action statistics");
    return std::nullopt;
  }
  VideoCA v;
  v.n_comments = comments.size();
  std::size_t markers = 0;
  std::vector<double> freqs;
  freqs.reserve(comments.size());
  for (const auto& c : comments) {
    freqs.push_back(c.frequency);
    if (c.has_marker) ++markers;
  }
  // Summing in sorted order makes the mean independent of comment order.
  std::sort(freqs.begin(), freqs.end());
  double sum = 0.0;
  for (double f : freqs) sum += f;
  const auto n = static_cast<double>(comments.size());
  v.mean_frequency = sum / n;
  v.marker_fraction = static_cast<double>(markers) / n;
  return v;
}

void write_video_ca(std::ostream& out, const std::map<std::string, VideoCA>& stats) {
  out << "id,n_comments,mean_ca_freq,marker_fraction\n";
  for (const auto& [id, v] : stats)
    out << id << ',' << v.n_comments << ',' << format_double(v.mean_frequency) << ','
        << format_double(v.marker_fraction) << '\n';
}

}  // namespace moralmap

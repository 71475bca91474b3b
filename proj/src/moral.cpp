#include "moralmap/moral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "moralmap/csv.hpp"
#include "moralmap/format.hpp"
#include "moralmap/stats.hpp"
#include "moralmap/text.hpp"

namespace moralmap {
namespace {

bool matches(std::string_view token, std::string_view pattern) {
  if (!pattern.empty() && pattern.back() == '*')
    return token.starts_with(pattern.substr(0, pattern.size() - 1));
  return token == pattern;
}

void validate_pattern(std::string_view p, std::size_t lineno) {
  const auto star = p.find('*');
  if (p.empty() || p == "*" || (star != std::string_view::npos && star != p.size() - 1))
    throw DataError("invalid lexicon pattern '" + std::string(p) + "' at line " +
                    std::to_string(lineno));
}

}  // namespace

std::string_view dimension_name(Dimension d) noexcept {
  switch (d) {
    case Dimension::care:
      return "care";
    case Dimension::fairness:
      return "fairness";
    case Dimension::loyalty:
      return "loyalty";
    case Dimension::authority:
      return "authority";
    case Dimension::sanctity:
      return "sanctity";
  }
  return "care";
}

std::optional<Dimension> parse_dimension(std::string_view s) noexcept {
  for (Dimension d : kDimensions)
    if (dimension_name(d) == s) return d;
  return std::nullopt;
}

MoralLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read lexicon file: " + path.string());
  return parse_lexicon(in);
}

MoralLexicon parse_lexicon(std::istream& in) {
  MoralLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = csv::split(t, '\t');
    if (fields.size() < 2 || fields.size() > 3)
      throw DataError("lexicon line " + std::to_string(lineno) + " needs 2 or 3 tab-separated fields");
    LexiconEntry e;
    e.pattern = text::to_lower_ascii(text::trim(fields[0]));
    validate_pattern(e.pattern, lineno);
    const auto dim = parse_dimension(text::trim(fields[1]));
    if (!dim) throw DataError("unknown moral dimension at lexicon line " + std::to_string(lineno));
    e.dimension = *dim;
    if (fields.size() == 3) {
      const auto w = parse_double(fields[2]);
      if (!w || !(*w > 0.0) || !std::isfinite(*w))
        throw DataError("lexicon weight must be positive at line " + std::to_string(lineno));
      e.weight = *w;
    }
    lex.entries.push_back(std::move(e));
  }
  return lex;
}

MoralScores score_with_lexicon(std::string_view s, const MoralLexicon& lexicon) {
  MoralScores out;
  const auto tokens = text::word_tokens(s);
  if (tokens.empty()) return out;
  MoralVector weighted{};
  for (const auto& tok : tokens) {
    MoralVector best{};
    for (const auto& e : lexicon.entries)
      if (matches(tok, e.pattern)) at(best, e.dimension) = std::max(at(best, e.dimension), e.weight);
    for (std::size_t d = 0; d < 5; ++d) weighted[d] += best[d];
  }
  const auto n = static_cast<double>(tokens.size());
  for (std::size_t d = 0; d < 5; ++d) out.raw[d] = std::clamp(weighted[d] / n, 0.0, 1.0);
  return out;
}

LoadedScores load_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read moral score file: " + path.string());
  return parse_external_scores(in);
}

LoadedScores parse_external_scores(std::istream& in) {
  LoadedScores out;
  std::string line;
  if (!std::getline(in, line)) throw DataError("moral score file is empty (header required)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split(line);
  std::optional<std::size_t> id_col;
  std::array<std::optional<std::size_t>, 5> dim_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = text::trim(header[i]);
    if (name == "id") id_col = i;
    if (const auto d = parse_dimension(name)) dim_col[static_cast<std::size_t>(*d)] = i;
  }
  if (!id_col) throw DataError("moral score file is missing the id column");
  for (Dimension d : kDimensions)
    if (!dim_col[static_cast<std::size_t>(d)])
      throw DataError("moral score file is missing the " + std::string(dimension_name(d)) + " column");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      out.errors.push_back({lineno, "expected " + std::to_string(header.size()) + " fields"});
      continue;
    }
    const std::string id(text::trim(fields[*id_col]));
    MoralScores sc;
    std::string problem;
    for (Dimension d : kDimensions) {
      const auto v = parse_double(fields[*dim_col[static_cast<std::size_t>(d)]]);
      if (!v) {
        problem = "unparsable " + std::string(dimension_name(d)) + " value";
        break;
      }
      if (!(*v >= 0.0 && *v <= 1.0)) {
        problem = std::string(dimension_name(d)) + " value " + format_double(*v) + " outside [0,1]";
        break;
      }
      at(sc.raw, d) = *v;
    }
    if (id.empty()) problem = "empty id";
    if (!problem.empty()) {
      out.errors.push_back({lineno, problem});
      continue;
    }
    if (!out.scores.emplace(id, sc).second)
      throw DataError("duplicate id '" + id + "' in moral score file at line " + std::to_string(lineno));
  }
  return out;
}

void write_scores(std::ostream& out, const ScoreTable& scores, ScoreVariant variant) {
  out << "id,care,fairness,loyalty,authority,sanctity\n";
  for (const auto& [id, sc] : scores) {
    const MoralVector& v = (variant == ScoreVariant::adjusted && sc.adjusted) ? *sc.adjusted : sc.raw;
    out << id;
    for (double x : v) out << ',' << format_double(x);
    out << '\n';
  }
}

ScoreTable baseline_adjust(const ScoreTable& target, const ScoreTable& baseline, Warnings* warnings) {
  if (target.empty()) throw DomainError("baseline_adjust: target set is empty");
  if (baseline.empty()) throw DomainError("baseline_adjust: baseline set is empty");

  ScoreTable out = target;
  for (Dimension d : kDimensions) {
    std::vector<double> base;
    base.reserve(baseline.size());
    for (const auto& [id, sc] : baseline) base.push_back(at(sc.raw, d));
    const double offset = stats::mean(base);

    std::vector<double> discounted;
    discounted.reserve(target.size());
    for (const auto& [id, sc] : target) discounted.push_back(at(sc.raw, d) - offset);
    const double m = stats::mean(discounted);
    const double sd = stats::sample_sd(discounted);
    const bool flat = stats::degenerate_spread(discounted, sd);
    if (flat)
      warn(warnings, "dimension " + std::string(dimension_name(d)) +
                         " has zero spread across the target set; adjusted values set to 0");
    std::size_t i = 0;
    for (auto& [id, sc] : out) {
      if (!sc.adjusted) sc.adjusted = MoralVector{};
      at(*sc.adjusted, d) = flat ? 0.0 : (discounted[i] - m) / sd;
      ++i;
    }
  }
  return out;
}

}  // namespace moralmap

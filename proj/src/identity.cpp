#include "moralmap/identity.hpp"

#include <cmath>
#include <ostream>

#include "moralmap/error.hpp"
#include "moralmap/format.hpp"
#include "moralmap/text.hpp"

namespace moralmap {

const PronounLexicon& PronounLexicon::standard() {
  static const PronounLexicon lexicon{
      {"i", "me", "my", "mine", "myself", "i'm", "i've", "i'll", "i'd"},
      {"we", "us", "our", "ours", "ourselves", "we're", "we've", "we'll", "we'd"},
  };
  return lexicon;
}

PronounStats pronoun_frequencies(std::string_view s, const PronounLexicon& lexicon) {
  const auto tokens = text::word_tokens(s);
  PronounStats st;
  st.token_count = tokens.size();
  if (tokens.empty()) return st;
  std::size_t singular = 0, plural = 0;
  for (const auto& t : tokens) {
    if (lexicon.singular.contains(t)) ++singular;
    else if (lexicon.plural.contains(t)) ++plural;
  }
  const auto n = static_cast<double>(tokens.size());
  st.f_i = static_cast<double>(singular) / n;
  st.f_we = static_cast<double>(plural) / n;
  return st;
}

double ci_index(const PronounStats& st) {
  const bool ok = std::isfinite(st.f_i) && std::isfinite(st.f_we) && st.f_i >= 0.0 &&
                  st.f_we >= 0.0 && st.f_i <= 1.0 && st.f_we <= 1.0 &&
                  st.f_i + st.f_we <= 1.0 + 1e-12;
  if (!ok) throw DomainError("pronoun frequencies must lie in [0,1] with f_I + f_we <= 1");
  return 0.5 + 0.5 * (st.f_i - st.f_we) / (st.f_i + st.f_we + 1.0);
}

std::string_view orientation_name(Orientation o) noexcept {
  switch (o) {
    case Orientation::communal:
      return "communal";
    case Orientation::agency:
      return "agency";
    case Orientation::unclassified:
      return "unclassified";
  }
  return "unclassified";
}

std::optional<Orientation> parse_orientation(std::string_view s) noexcept {
  if (s == "communal") return Orientation::communal;
  if (s == "agency") return Orientation::agency;
  if (s == "unclassified") return Orientation::unclassified;
  return std::nullopt;
}

Orientation classify_orientation(double index, const OrientationThresholds& th) {
  if (index <= th.communal_max) return Orientation::communal;
  if (index >= th.agency_min) return Orientation::agency;
  return Orientation::unclassified;
}

void write_ci_header(std::ostream& out) { out << "id,f_i,f_we,ci_index,orientation\n"; }

void write_ci_row(std::ostream& out, std::string_view id, const PronounStats& st, double index,
                  Orientation o) {
  out << id << ',' << format_double(st.f_i) << ',' << format_double(st.f_we) << ','
      << format_double(index) << ',' << orientation_name(o) << '\n';
}

}  // namespace moralmap

#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace moralmap {

/// First-person pronoun inventories, matched against case-folded tokens.
struct PronounLexicon {
  std::set<std::string, std::less<>> singular;
  std::set<std::string, std::less<>> plural;

  static const PronounLexicon& standard();
};

struct PronounStats {
  double f_i = 0.0;
  double f_we = 0.0;
  std::size_t token_count = 0;
};

/// Relative frequency of each pronoun group among all word tokens.
PronounStats pronoun_frequencies(std::string_view text,
                                 const PronounLexicon& lexicon = PronounLexicon::standard());

/// Collective Identity index: 0.5 + 0.5 (f_I - f_we) / (f_I + f_we + 1).
/// Lies in [0.25, 0.75]; below 0.5 leans communal, above leans agentic.
/// Throws DomainError unless f_I, f_we in [0,1] and f_I + f_we <= 1.
double ci_index(const PronounStats& stats);

enum class Orientation { communal, agency, unclassified };

std::string_view orientation_name(Orientation o) noexcept;
std::optional<Orientation> parse_orientation(std::string_view s) noexcept;

struct OrientationThresholds {
  double communal_max = 0.4;
  double agency_min = 0.6;
};

/// communal iff index <= communal_max, agency iff index >= agency_min.
Orientation classify_orientation(double index, const OrientationThresholds& thresholds = {});

/// One row of the CI output file: id,f_i,f_we,ci_index,orientation.
void write_ci_header(std::ostream& out);
void write_ci_row(std::ostream& out, std::string_view id, const PronounStats& stats, double index,
                  Orientation orientation);

}  // namespace moralmap

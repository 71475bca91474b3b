#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moralmap/corpus.hpp"
#include "moralmap/error.hpp"

namespace moralmap {

enum class Dimension { care, fairness, loyalty, authority, sanctity };

inline constexpr std::array<Dimension, 5> kDimensions = {
    Dimension::care, Dimension::fairness, Dimension::loyalty, Dimension::authority,
    Dimension::sanctity};

std::string_view dimension_name(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view s) noexcept;

using MoralVector = std::array<double, 5>;

inline double& at(MoralVector& v, Dimension d) noexcept { return v[static_cast<std::size_t>(d)]; }
inline double at(const MoralVector& v, Dimension d) noexcept { return v[static_cast<std::size_t>(d)]; }

struct MoralScores {
  MoralVector raw{};
  std::optional<MoralVector> adjusted;
};

/// Scores keyed by document id; ordered so every output is deterministic.
using ScoreTable = std::map<std::string, MoralScores>;

struct LexiconEntry {
  std::string pattern;  // lowercase, optional single trailing '*'
  Dimension dimension = Dimension::care;
  double weight = 1.0;
};

struct MoralLexicon {
  std::vector<LexiconEntry> entries;
};

/// Lexicon file: "pattern<TAB>dimension[<TAB>weight]" per line, '#' comments.
MoralLexicon load_lexicon(const std::filesystem::path& path);
MoralLexicon parse_lexicon(std::istream& in);

/// Per dimension: weighted count of matching tokens over all tokens, clamped
/// to [0,1]. A token counts once per dimension, with the largest weight among
/// the patterns it matches.
MoralScores score_with_lexicon(std::string_view text, const MoralLexicon& lexicon);

struct LoadedScores {
  ScoreTable scores;
  std::vector<RecordError> errors;
};

/// Reads id,care,fairness,loyalty,authority,sanctity (header required,
/// columns in any order). Out-of-range or unparsable rows are record
/// errors; a missing column or a duplicate id throws DataError.
LoadedScores load_external_scores(const std::filesystem::path& path);
LoadedScores parse_external_scores(std::istream& in);

enum class ScoreVariant { raw, adjusted };

/// Writes the score file format; `variant` picks raw or adjusted values.
void write_scores(std::ostream& out, const ScoreTable& scores, ScoreVariant variant);

/// Subtracts the baseline per-dimension mean, then z-scores each dimension
/// across `target` with the sample (n-1) standard deviation. A dimension with
/// zero spread gets adjusted value 0 and a warning.
ScoreTable baseline_adjust(const ScoreTable& target, const ScoreTable& baseline,
                           Warnings* warnings = nullptr);

}  // namespace moralmap

#pragma once
// Synthetic corpus with planted structure, used by the end-to-end tests and
// the `synth` subcommand. Every random draw comes from one seeded stream
// with portable transforms, so the files are identical across platforms.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "moralmap/identity.hpp"

namespace moralmap {

struct SyntheticTruth {
  /// Orientation of every video that should survive the topic filter.
  std::map<std::string, Orientation> orientation;
  /// Planted moral cluster (0 or 1) of every communal or agency video.
  std::map<std::string, int> cluster;
  /// The communal cluster whose comments carry collective-action language.
  int ca_enriched_cluster = 0;
};

/// Writes corpus.jsonl, moral_scores.csv, embeddings.csv, config.json and
/// truth/{orientation,clusters}.csv under `dir` and returns the truth.
/// About 300 challenge videos (including recipe, non-English, too-short and
/// mixed-pronoun ones), 60 baseline videos and 3,000 comments.
SyntheticTruth write_synthetic_fixture(const std::filesystem::path& dir, std::uint64_t seed = 7);

}  // namespace moralmap

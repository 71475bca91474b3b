#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moralmap/cluster.hpp"
#include "moralmap/corpus.hpp"
#include "moralmap/identity.hpp"
#include "moralmap/inference.hpp"
#include "moralmap/metric.hpp"
#include "moralmap/moral.hpp"
#include "moralmap/reducer.hpp"
#include "moralmap/topics.hpp"

namespace moralmap {

enum class Scorer { external, lexicon };
enum class StandardizeScope { orientation, global };
enum class ClusterMode { search, fixed };

inline constexpr std::array<Orientation, 2> kGroups = {Orientation::communal, Orientation::agency};

struct PipelineConfig {
  struct Inputs {
    std::filesystem::path corpus;
    std::filesystem::path embeddings;
    std::optional<std::filesystem::path> moral_scores;
    std::optional<std::filesystem::path> lexicon;
    std::filesystem::path ca_dictionary;
    std::map<Orientation, std::filesystem::path> label_mapping;
  } inputs;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  struct Filter {
    std::string language_prefix = "en";
    std::size_t transcript_min_unique = 5;
    std::size_t comment_min_unique = 6;
  } filter;

  struct Topics {
    LdaConfig lda;
    std::size_t min_df = 2;
    std::optional<std::size_t> keep_topic;
    std::string drop_anchor = "recipe";
    std::size_t top_words = 10;
    std::size_t top_docs = 5;
  } topics;

  OrientationThresholds thresholds;

  struct Moral {
    Scorer scorer = Scorer::external;
    StandardizeScope scope = StandardizeScope::orientation;
    ScoreVariant reducer_input = ScoreVariant::adjusted;
  } moral;

  ReducerConfig reducer;

  struct Cluster {
    ClusterMode mode = ClusterMode::search;
    std::size_t trials = 50;
    SearchSpace space = SearchSpace::defaults();
    std::map<Orientation, ClusteringParams> fixed;
  } cluster;

  std::size_t annotation_k = 30;
  Metric coherence_metric = Metric::cosine;
  RegressionSpec regression = RegressionSpec::standard();
  bool svg = true;

  /// The fully resolved configuration document, echoed in the report.
  nlohmann::ordered_json echo;
};

/// Built-in defaults as a configuration document.
nlohmann::ordered_json default_config_document();

/// Applies "dotted.key=value"; the value is parsed as JSON when possible and
/// taken as a string otherwise. Throws ValidationError on a malformed
/// assignment.
void apply_override(nlohmann::ordered_json& doc, std::string_view assignment);

/// Merges `doc` over the defaults, resolves relative paths against
/// `base_dir` and checks every field. All violations are reported together
/// in one ValidationError, each prefixed with its field path.
PipelineConfig resolve_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);

/// Reads the config file, applies overrides and resolves it.
PipelineConfig validate_config(const std::filesystem::path& path,
                               const std::vector<std::string>& overrides = {});

/// Pipeline stages in execution order. `cluster` uses fixed parameters,
/// `search` the DBCV random search; run_pipeline picks one from the config.
enum class Stage {
  ingest,
  filter,
  topics,
  ci,
  moral,
  reduce,
  cluster,
  search,
  annotate_export,
  annotate_apply,
  coherence,
  align,
  ca,
  regress,
  report,
};

std::string_view stage_name(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

/// Runs one stage against the artifacts in the output directory. Throws
/// ValidationError or DataError unchanged and wraps every other failure in
/// StageError. Returns true when the stage reused a matching earlier result.
bool run_stage(Stage stage, const PipelineConfig& config);

/// Runs every stage and returns the report document (also written to
/// report.json).
nlohmann::ordered_json run_pipeline(const PipelineConfig& config);

/// Writes, per cluster, the k videos nearest its centroid in `layout`
/// (top_k_central order) to `dir`/cluster_<id>.jsonl, plus an all-comment
/// label template `dir`/labels.tsv. Returns the bundle sizes per cluster.
std::map<int, std::size_t> export_annotation_bundle(const std::filesystem::path& dir,
                                                    std::span<const std::string> ids, const Matrix& layout,
                                                    const ClusterModel& model,
                                                    const std::map<std::string, VideoDoc>& videos,
                                                    Orientation orientation, std::size_t k = 30);

}  // namespace moralmap

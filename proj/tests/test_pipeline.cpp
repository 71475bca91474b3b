#include <filesystem>
#include <fstream>
#include <sstream>

#include "../src/pipeline/artifacts.hpp"
#include "doctest.h"
#include "moralmap/embedding.hpp"
#include "moralmap/error.hpp"
#include "moralmap/pipeline.hpp"
#include "moralmap/synthetic.hpp"

using namespace moralmap;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("moralmap_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void touch(const fs::path& p) { std::ofstream(p) << "x\n"; }

json minimal_inputs(const fs::path& dir) {
  touch(dir / "corpus.jsonl");
  touch(dir / "emb.csv");
  touch(dir / "scores.csv");
  return {{"inputs", {{"corpus", "corpus.jsonl"}, {"embeddings", "emb.csv"}, {"moral_scores", "scores.csv"}}}};
}

std::string error_of(const json& doc, const fs::path& base) {
  try {
    resolve_config(doc, base);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fixture generated once and shared by the end-to-end cases.
const fs::path& fixture() {
  static const fs::path dir = [] {
    const auto d = scratch("fixture");
    write_synthetic_fixture(d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("minimal config is completed with defaults") {
  const auto dir = scratch("cfg_min");
  const auto cfg = resolve_config(minimal_inputs(dir), dir);
  CHECK(cfg.thresholds.communal_max == 0.4);
  CHECK(cfg.thresholds.agency_min == 0.6);
  CHECK(cfg.seed == 0);
  CHECK(cfg.inputs.corpus == dir / "corpus.jsonl");
  CHECK(cfg.inputs.ca_dictionary.filename() == "collective_action.dic");
  CHECK(cfg.topics.lda.n_topics == 2);
  CHECK(cfg.topics.lda.iterations == 1000);
  CHECK(cfg.cluster.fixed.at(Orientation::agency) == *ClusteringParams::preset("agency-default"));
  CHECK(cfg.echo.at("orientation").at("communal_max") == 0.4);
}

TEST_CASE("threshold ordering is enforced") {
  const auto dir = scratch("cfg_thr");
  auto doc = minimal_inputs(dir);
  doc["orientation"] = {{"communal_max", 0.7}, {"agency_min", 0.6}};
  CHECK(error_of(doc, dir).find("orientation") != std::string::npos);
  doc["orientation"] = {{"communal_max", 0.0}, {"agency_min", 0.6}};
  CHECK_FALSE(error_of(doc, dir).empty());
}

TEST_CASE("dangling paths and unknown fields name the field") {
  const auto dir = scratch("cfg_path");
  auto doc = minimal_inputs(dir);
  fs::remove(dir / "emb.csv");
  doc["reducer"] = {{"n_neighbours", 10}};
  const auto msg = error_of(doc, dir);
  CHECK(msg.find("inputs.embeddings") != std::string::npos);
  CHECK(msg.find("reducer.n_neighbours") != std::string::npos);
}

TEST_CASE("scorer choice decides which input is required") {
  const auto dir = scratch("cfg_scorer");
  auto doc = minimal_inputs(dir);
  doc["moral"] = {{"scorer", "lexicon"}};
  CHECK(error_of(doc, dir).find("inputs.lexicon") != std::string::npos);
}

TEST_CASE("overrides reach nested fields") {
  const auto dir = scratch("cfg_set");
  auto doc = minimal_inputs(dir);
  apply_override(doc, "orientation.communal_max=0.3");
  apply_override(doc, "cluster.mode=fixed");
  apply_override(doc, "cluster.communal={\"min_samples\":4,\"min_cluster_size\":9,\"metric\":\"manhattan\"}");
  const auto cfg = resolve_config(doc, dir);
  CHECK(cfg.thresholds.communal_max == 0.3);
  CHECK(cfg.cluster.mode == ClusterMode::fixed);
  CHECK(cfg.cluster.fixed.at(Orientation::communal) == ClusteringParams{4, 9, Metric::manhattan});
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ValidationError);
}

TEST_CASE("stage names round trip") {
  for (int s = 0; s <= static_cast<int>(Stage::report); ++s) {
    const auto stage = static_cast<Stage>(s);
    CHECK(parse_stage(stage_name(stage)) == stage);
  }
  CHECK(parse_stage("annotate-export") == Stage::annotate_export);
  CHECK_FALSE(parse_stage("cluster-all"));
}

TEST_CASE("derived seeds differ by purpose and are stable") {
  CHECK(artifacts::derive_seed(0, "reduce:communal") != artifacts::derive_seed(0, "reduce:agency"));
  CHECK(artifacts::derive_seed(1, "topics") != artifacts::derive_seed(2, "topics"));
  CHECK(artifacts::derive_seed(5, "topics") == artifacts::derive_seed(5, "topics"));
}

TEST_CASE("annotation bundles saturate and cap at k") {
  const auto dir = scratch("bundle");
  // Cluster 0: 10 points, cluster 1: 40 points, on two lines.
  Matrix layout(50, 2);
  std::vector<std::string> ids;
  ClusterModel model;
  model.n_clusters = 2;
  std::map<std::string, VideoDoc> videos;
  for (std::size_t i = 0; i < 50; ++i) {
    const bool first = i < 10;
    layout(i, 0) = first ? 0.3 * static_cast<double>(i) : 100.0 + 0.17 * static_cast<double>(i);
    layout(i, 1) = first ? 0.0 : static_cast<double>(i % 7);
    char id[8];
    std::snprintf(id, sizeof id, "v%03zu", (i * 37) % 50);
    ids.emplace_back(id);
    model.labels.push_back(first ? 0 : 1);
    VideoDoc v;
    v.id = id;
    v.transcript = "transcript of " + v.id;
    videos[v.id] = v;
  }
  const auto sizes = export_annotation_bundle(dir, ids, layout, model, videos, Orientation::communal, 30);
  CHECK(sizes == std::map<int, std::size_t>{{0, 10}, {1, 30}});

  for (int c = 0; c < 2; ++c) {
    std::vector<std::string> member_ids;
    std::vector<double> values;
    for (std::size_t i = 0; i < 50; ++i)
      if (model.labels[i] == c) {
        member_ids.push_back(ids[i]);
        values.push_back(layout(i, 0));
        values.push_back(layout(i, 1));
      }
    const Matrix pts(member_ids.size(), 2, values);
    const auto expected = top_k_central(pts, member_ids, 30);
    std::ifstream in(dir / ("cluster_" + std::to_string(c) + ".jsonl"));
    std::vector<std::string> got;
    for (std::string line; std::getline(in, line);) {
      const auto j = json::parse(line);
      CHECK(j.at("transcript") == "transcript of " + j.at("id").get<std::string>());
      got.push_back(j.at("id"));
    }
    CHECK(got == expected);
  }

  const auto mapping = read_label_mapping(dir / "labels.tsv");
  CHECK(mapping.empty());
  const auto applied = apply_narrative_labels(model, mapping, Orientation::communal);
  CHECK(applied.labels == model.labels);
  CHECK(applied.narrative_labels.empty());
}

TEST_CASE("stages report missing upstream artifacts as data errors") {
  const auto dir = fixture();
  auto doc = json::parse(slurp(dir / "config.json"));
  doc["output_dir"] = (scratch("empty_out")).string();
  const auto cfg = resolve_config(doc, dir);
  CHECK_THROWS_AS(run_stage(Stage::regress, cfg), DataError);
  CHECK_THROWS_AS(run_stage(Stage::ci, cfg), DataError);
}

TEST_CASE("every video in the discard band halts after gating") {
  const auto dir = fixture();
  auto doc = json::parse(slurp(dir / "config.json"));
  const auto out = scratch("halt");
  doc["output_dir"] = out.string();
  doc["orientation"] = {{"communal_max", 0.01}, {"agency_min", 0.99}};
  const auto cfg = resolve_config(doc, dir);
  try {
    run_pipeline(cfg);
    FAIL("pipeline did not halt");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ci");
    CHECK(std::string(e.what()).find("no videos in orientation groups") != std::string::npos);
  }
  // Partial artifacts stay on disk.
  CHECK(fs::exists(out / "ci.csv"));
  CHECK(fs::exists(out / "topics" / "summary.json"));
  CHECK_FALSE(fs::exists(out / "report.json"));
}

TEST_CASE("end-to-end run is deterministic and resumable") {
  const auto dir = fixture();
  auto doc = json::parse(slurp(dir / "config.json"));
  const auto out = scratch("e2e");
  doc["output_dir"] = out.string();
  const auto cfg = resolve_config(doc, dir);
  const auto report = run_pipeline(cfg);
  const std::string first = slurp(out / "report.json");
  CHECK(report.at("orientation_counts").at("communal") == 100);
  CHECK(report.at("stage_counts").at("monotone") == true);
  for (auto name : {"stage_counts.csv", "cluster_layout.csv", "cluster_layout.svg", "moral_profiles.csv",
                    "collective_action.csv", "coherence_alignment.csv", "embedding_layout.csv"})
    CHECK(fs::exists(out / "figures" / name));

  // Expensive stages are reused when nothing changed.
  CHECK(run_stage(Stage::topics, cfg));
  CHECK(run_stage(Stage::search, cfg));
  run_stage(Stage::report, cfg);
  CHECK(slurp(out / "report.json") == first);

  // The report is rebuilt from persisted artifacts alone.
  fs::remove_all(out / "figures");
  fs::remove(out / "report.json");
  run_stage(Stage::report, cfg);
  CHECK(slurp(out / "report.json") == first);

  // Fresh run in the same place reproduces every byte.
  fs::remove_all(out);
  run_pipeline(cfg);
  CHECK(slurp(out / "report.json") == first);

  // A changed topic setting invalidates the stored topic model.
  auto changed = doc;
  changed["topics"] = {{"iterations", 200}};
  CHECK_FALSE(run_stage(Stage::topics, resolve_config(changed, dir)));
}

TEST_CASE("label mapping from the config is applied") {
  const auto dir = fixture();
  auto doc = json::parse(slurp(dir / "config.json"));
  const auto out = scratch("labels");
  doc["output_dir"] = out.string();
  std::ofstream(dir / "communal_labels.tsv") << "0\teducate_inform\n1\tfight_protest\n";
  doc["inputs"]["label_mapping"] = {{"communal", "communal_labels.tsv"}};
  const auto cfg = resolve_config(doc, dir);
  run_pipeline(cfg);
  const auto report = json::parse(slurp(out / "report.json"));
  std::set<std::string> groups;
  for (const auto& n : report.at("narratives")) groups.insert(n.at("group").get<std::string>());
  CHECK(groups.contains("educate_inform"));
  CHECK(groups.contains("fight_protest"));
  CHECK(groups.contains("agency_0"));

  // A label that does not fit the orientation is rejected.
  std::ofstream(dir / "bad_labels.tsv") << "0\tgoodhealth_personal\n";
  doc["inputs"]["label_mapping"] = {{"communal", "bad_labels.tsv"}};
  CHECK_THROWS_AS(run_stage(Stage::annotate_apply, resolve_config(doc, dir)), ValidationError);
}

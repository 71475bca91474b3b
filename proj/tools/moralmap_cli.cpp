#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moralmap/error.hpp"
#include "moralmap/pipeline.hpp"
#include "moralmap/synthetic.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kStage = 3;
constexpr int kData = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace moralmap;
  CLI::App app{"Narrative, moral and collective-action analysis of challenge videos"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MORALMAP_VERSION));

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override one field: dotted.key=value (repeatable)");
  };

  std::vector<std::pair<CLI::App*, Stage>> stage_commands;
  for (Stage s : {Stage::ingest, Stage::filter, Stage::topics, Stage::ci, Stage::moral, Stage::reduce,
                  Stage::cluster, Stage::search, Stage::annotate_export, Stage::annotate_apply, Stage::coherence,
                  Stage::align, Stage::ca, Stage::regress, Stage::report}) {
    auto* sub = app.add_subcommand(std::string(stage_name(s)), "Run the " + std::string(stage_name(s)) + " stage");
    add_config(sub);
    stage_commands.emplace_back(sub, s);
  }
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order and write the report");
  add_config(run_all);
  auto* validate = app.add_subcommand("validate", "Resolve and check a configuration, print it");
  add_config(validate);

  std::string synth_dir;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "Write the synthetic fixture with planted structure");
  synth->add_option("--out", synth_dir, "Directory to write")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      write_synthetic_fixture(synth_dir, synth_seed);
      std::cout << "wrote synthetic fixture to " << synth_dir << '\n';
      return kOk;
    }
    const auto config = validate_config(config_path, overrides);
    if (validate->parsed()) {
      std::cout << config.echo.dump(2) << '\n';
      return kOk;
    }
    if (run_all->parsed()) {
      run_pipeline(config);
      std::cout << "report written to " << (config.output_dir / "report.json").string() << '\n';
      return kOk;
    }
    for (const auto& [sub, stage] : stage_commands) {
      if (!sub->parsed()) continue;
      if (run_stage(stage, config))
        std::cerr << stage_name(stage) << ": inputs unchanged, kept the previous result\n";
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const StageError& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kStage;
  } catch (const std::exception& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kStage;
  }
  return kOk;
}

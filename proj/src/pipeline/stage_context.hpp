#pragma once

#include <string>

#include "artifacts.hpp"
#include "moralmap/error.hpp"
#include "moralmap/pipeline.hpp"

namespace moralmap {

struct StageContext {
  const PipelineConfig& cfg;
  artifacts::Layout out;
  Warnings warnings;
};

/// Group name of a cluster: its narrative label when one is attached,
/// "<orientation>_<id>" otherwise, "noise" for label -1.
std::string group_name(Orientation o, int label, const ClusterModel& model);

void write_report(StageContext& ctx);

}  // namespace moralmap

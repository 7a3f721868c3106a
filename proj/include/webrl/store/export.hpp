#pragma once

#include <filesystem>
#include <string>

#include "webrl/store/store.hpp"

namespace webrl::store {

struct ExportConfig {
  double klcov_fraction = 0.002;
  double advantage_eps = 1e-6;
  // "hybrid_total": group rewards are the hybrid breakdown totals.
  // "task_completion": group rewards are the raw TC scores.
  std::string reward_source = "hybrid_total";
};

// Writes one line-delimited record per valid, scored trajectory: task text,
// response text (thoughts + canonical actions), group-relative advantage, and
// per-token placeholder slots the external trainer fills with logprobs before
// applying klcov_select. Invalid trajectories (task_completion = -1) never
// reach the output. Returns the number of records written.
int export_grpo_batch(const TrajectoryStore& store, const std::string& run_id,
                      const std::filesystem::path& out_file, const ExportConfig& cfg);

}  // namespace webrl::store

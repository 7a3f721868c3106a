#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "webrl/core/env.hpp"
#include "webrl/core/types.hpp"
#include "webrl/gateway/gateway.hpp"

namespace webrl::rollout {

// Infrastructure fault inside the episode loop (environment init, fatal
// gateway error). Policy misbehavior is recorded in the trajectory instead.
class EpisodeError : public Error {
 public:
  using Error::Error;
};

// Text-only record of a past step; no image data ever enters the history.
struct HistoryEntry {
  int index = 0;
  std::string thought;
  std::string action_text;       // canonical serialized action
  std::string exec_status_text;  // "ok", "timeout", "format_error(...)", ...
};

struct RolloutConfig {
  int max_steps = 30;
  int history_window = 30;  // entries kept verbatim; older ones elided
  bool stop_on_format_error = false;
  std::uint64_t seed_base = 0;  // episode i runs with seed seed_base + i
  bool parallel = true;         // run_group concurrency
};

// Bundle with the task query, the windowed textual history, the current URL,
// and exactly the current screenshot as the sole image.
gateway::PromptBundle build_prompt(const core::TaskSpec& task,
                                   std::span<const HistoryEntry> history,
                                   const core::Observation& obs, const RolloutConfig& cfg,
                                   std::uint64_t seed);

// One observe -> prompt -> complete -> parse -> execute loop. Terminates on an
// Answer action, the step budget, or an unrecoverable environment failure.
// Format errors mark the step, switch the action to a placeholder Wait, and
// (unless stop_on_format_error) inject a corrective note into the next prompt.
core::Trajectory run_episode(const core::TaskSpec& task, core::Environment& env,
                             gateway::Gateway& gw, const RolloutConfig& cfg,
                             std::uint64_t episode_seed = 0);

// G independent episodes for the same task (fresh environment per repetition),
// order preserved. Per-episode infrastructure failures yield a trajectory with
// terminal = EnvFailure; the group is still returned in full.
std::vector<core::Trajectory> run_group(const core::TaskSpec& task,
                                        const core::EnvFactory& env_factory,
                                        gateway::Gateway& gw, const RolloutConfig& cfg);

}  // namespace webrl::rollout

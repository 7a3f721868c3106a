#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webrl/core/error.hpp"
#include "webrl/core/types.hpp"

namespace webrl::reward {

class RangeError : public Error {
 public:
  using Error::Error;
};

struct RewardConfig {
  double step_penalty = -0.001;     // per penalized step
  double ssim_one_epsilon = 1e-6;   // "no visual change" means ssim >= 1 - eps
  double w_tc = 0.7;                // outcome weights, sum to 1
  double w_av = 0.15;
  double w_te = 0.15;
  double format_penalty = -0.25;    // per violating step, <= 0
  std::vector<core::ElementRole> interactable_roles = {
      core::ElementRole::Button,  core::ElementRole::Link,
      core::ElementRole::Input,   core::ElementRole::Select,
      core::ElementRole::Checkbox, core::ElementRole::MenuItem};

  // Throws RangeError when the invariants don't hold (penalty sign, weight sum).
  void validate() const;
};

// External semantic check used by the rule cascade's fallback branch:
// does the before->after change constitute progress toward the query?
using ProgressJudge =
    std::function<bool(const std::string& query, const core::Image& before,
                       const core::Image& after)>;

// Ordered branches of the per-step process-reward cascade.
enum class RdtBranch {
  ExecutionFailed = 1,  // dispatch failed             -> penalty
  UrlChanged,           // significant state transition -> 0
  InteractableHit,      // valid UI affordance          -> 0
  NoVisualChange,       // redundant action             -> penalty
  JudgedProgress,       // semantic verification        -> 0
  IrrelevantChange,     // visual noise                 -> penalty
};

std::string_view rdt_branch_name(RdtBranch b);

struct RdtResult {
  RdtBranch branch;
  double reward;
};

// Evaluates the cascade strictly in order; exactly one branch fires. The
// progress judge is invoked only when branches 1-4 all pass over the step.
// Branch 3 applies to Click/Hover/Type actions whose point hits an element
// with a role in cfg.interactable_roles on the pre-action observation.
RdtResult rdt_evaluate(const core::Step& step, const std::string& query,
                       const RewardConfig& cfg, const ProgressJudge& judge);

inline double rdt_step_reward(const core::Step& step, const std::string& query,
                              const RewardConfig& cfg, const ProgressJudge& judge) {
  return rdt_evaluate(step, query, cfg, judge).reward;
}

// format_penalty x (number of steps flagged with a format violation).
double format_reward(const core::Trajectory& traj, const RewardConfig& cfg);

// nullopt = discard (task_completion == -1). Otherwise
// w_tc*(TC/5) + w_av*(AV-1)/4 + w_te*(TE-1)/4, in [0, 1].
// Throws RangeError on scores outside their declared ranges.
std::optional<double> outcome_reward(const core::JudgeScores& scores,
                                     const RewardConfig& cfg);

struct RewardBreakdown {
  std::vector<double> per_step;
  double outcome = 0.0;
  double format = 0.0;
  std::optional<double> total;  // unset when invalid
  bool invalid = false;
};

// total = outcome + sum(per_step) + format; invalid (and total unset) when the
// outcome judge discarded the trajectory.
RewardBreakdown hybrid_reward(const core::Trajectory& traj, const core::JudgeScores& scores,
                              const RewardConfig& cfg, const ProgressJudge& judge);

}  // namespace webrl::reward

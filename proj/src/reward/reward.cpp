#include "webrl/reward/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "webrl/reward/ssim.hpp"

namespace webrl::reward {

void RewardConfig::validate() const {
  if (!(step_penalty < 0.0)) throw RangeError("reward config: step_penalty must be negative");
  if (format_penalty > 0.0) throw RangeError("reward config: format_penalty must be <= 0");
  if (w_tc < 0.0 || w_av < 0.0 || w_te < 0.0)
    throw RangeError("reward config: outcome weights must be nonnegative");
  if (std::abs(w_tc + w_av + w_te - 1.0) > 1e-9)
    throw RangeError("reward config: outcome weights must sum to 1");
  if (!(ssim_one_epsilon > 0.0))
    throw RangeError("reward config: ssim_one_epsilon must be positive");
}

std::string_view rdt_branch_name(RdtBranch b) {
  switch (b) {
    case RdtBranch::ExecutionFailed: return "execution_failed";
    case RdtBranch::UrlChanged: return "url_changed";
    case RdtBranch::InteractableHit: return "interactable_hit";
    case RdtBranch::NoVisualChange: return "no_visual_change";
    case RdtBranch::JudgedProgress: return "judged_progress";
    case RdtBranch::IrrelevantChange: return "irrelevant_change";
  }
  return "irrelevant_change";
}

RdtResult rdt_evaluate(const core::Step& step, const std::string& query,
                       const RewardConfig& cfg, const ProgressJudge& judge) {
  // 1. Dispatch failure.
  if (step.exec_status != core::ExecStatus::Ok)
    return {RdtBranch::ExecutionFailed, cfg.step_penalty};

  // 2. Significant state transition.
  if (step.obs_before.url != step.obs_after.url) return {RdtBranch::UrlChanged, 0.0};

  // 3. Valid UI affordance. Typing needs an input-like target just as clicks
  //    and hovers do, so all three pointer-carrying kinds qualify.
  const bool pointer_kind = step.action.kind == core::ActionKind::Click ||
                            step.action.kind == core::ActionKind::Hover ||
                            step.action.kind == core::ActionKind::Type;
  if (pointer_kind && step.action.point) {
    const auto hit = core::hit_test(*step.action.point, step.obs_before.elements);
    if (hit && std::find(cfg.interactable_roles.begin(), cfg.interactable_roles.end(),
                         hit->role) != cfg.interactable_roles.end()) {
      return {RdtBranch::InteractableHit, 0.0};
    }
  }

  // 4. Redundant action: the screen did not change.
  if (ssim(step.obs_before.screenshot, step.obs_after.screenshot) >=
      1.0 - cfg.ssim_one_epsilon) {
    return {RdtBranch::NoVisualChange, cfg.step_penalty};
  }

  // 5./6. Semantic fallback.
  if (judge(query, step.obs_before.screenshot, step.obs_after.screenshot))
    return {RdtBranch::JudgedProgress, 0.0};
  return {RdtBranch::IrrelevantChange, cfg.step_penalty};
}

double format_reward(const core::Trajectory& traj, const RewardConfig& cfg) {
  long violations = 0;
  for (const core::Step& s : traj.steps) {
    if (s.format_violation) ++violations;
  }
  return cfg.format_penalty * double(violations);
}

std::optional<double> outcome_reward(const core::JudgeScores& scores, const RewardConfig& cfg) {
  if (scores.task_completion < -1 || scores.task_completion > 5)
    throw RangeError("outcome_reward: task_completion outside [-1, 5]");
  if (scores.action_validity < 1 || scores.action_validity > 5)
    throw RangeError("outcome_reward: action_validity outside [1, 5]");
  if (scores.trajectory_efficiency < 1 || scores.trajectory_efficiency > 5)
    throw RangeError("outcome_reward: trajectory_efficiency outside [1, 5]");

  if (scores.task_completion == -1) return std::nullopt;
  return cfg.w_tc * (double(scores.task_completion) / 5.0) +
         cfg.w_av * (double(scores.action_validity - 1) / 4.0) +
         cfg.w_te * (double(scores.trajectory_efficiency - 1) / 4.0);
}

RewardBreakdown hybrid_reward(const core::Trajectory& traj, const core::JudgeScores& scores,
                              const RewardConfig& cfg, const ProgressJudge& judge) {
  RewardBreakdown out;
  out.per_step.reserve(traj.steps.size());
  for (const core::Step& s : traj.steps) {
    out.per_step.push_back(rdt_step_reward(s, traj.task.query, cfg, judge));
  }
  out.format = format_reward(traj, cfg);

  const std::optional<double> outcome = outcome_reward(scores, cfg);
  if (!outcome) {
    out.invalid = true;
    return out;
  }
  out.outcome = *outcome;
  out.total = out.outcome +
              std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0) + out.format;
  return out;
}

}  // namespace webrl::reward

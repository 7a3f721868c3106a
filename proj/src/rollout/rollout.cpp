#include "webrl/rollout/rollout.hpp"

#include <future>
#include <sstream>

#include "webrl/core/wire.hpp"

namespace webrl::rollout {

namespace {

constexpr const char* kPolicySystemPrompt =
    "You are a web-navigation agent. You see one screenshot of the current page. "
    "Reply with your reasoning inside <think>...</think>, then exactly one action as a "
    "single-line JSON object: {\"action\":\"click|type|scroll|hover|navigate|go_back|wait|"
    "answer\", ...} with payload keys x, y, text, url, delta as the action requires.";

std::string render_history(std::span<const HistoryEntry> history, int window) {
  std::ostringstream out;
  if (history.empty()) {
    out << "(no previous steps)\n";
    return out.str();
  }
  const std::size_t keep = std::min<std::size_t>(history.size(), std::size_t(window));
  const std::size_t elided = history.size() - keep;
  if (elided > 0) out << "..." << elided << " earlier steps omitted\n";
  for (std::size_t i = elided; i < history.size(); ++i) {
    const HistoryEntry& h = history[i];
    out << "step " << h.index << ": thought: " << h.thought << "\n";
    out << "step " << h.index << ": action: " << h.action_text
        << " -> " << h.exec_status_text << "\n";
  }
  return out.str();
}

}  // namespace

gateway::PromptBundle build_prompt(const core::TaskSpec& task,
                                   std::span<const HistoryEntry> history,
                                   const core::Observation& obs, const RolloutConfig& cfg,
                                   std::uint64_t seed) {
  gateway::PromptBundle bundle;
  bundle.system = kPolicySystemPrompt;

  std::ostringstream user;
  user << "Task: " << task.query << "\n";
  user << "Current URL: " << obs.url << "\n";
  user << "History:\n" << render_history(history, cfg.history_window);
  user << "The attached screenshot shows the current page. Choose the next action.";
  bundle.turns.emplace_back("user", user.str());

  bundle.image = obs.screenshot;  // the sole image, always the current frame
  bundle.generation.seed = seed;
  return bundle;
}

core::Trajectory run_episode(const core::TaskSpec& task, core::Environment& env,
                             gateway::Gateway& gw, const RolloutConfig& cfg,
                             std::uint64_t episode_seed) {
  core::Trajectory traj;
  traj.task = task;
  traj.terminal = core::TerminalStatus::MaxStepsReached;

  core::Observation obs;
  try {
    obs = env.reset(task.start_url);
  } catch (const core::EnvError& e) {
    throw EpisodeError(std::string("episode: environment reset failed: ") + e.what());
  }

  std::vector<HistoryEntry> history;
  std::string corrective_note;
  const int budget = std::min(cfg.max_steps, task.max_steps);

  for (int i = 0; i < budget; ++i) {
    gateway::PromptBundle bundle = build_prompt(task, history, obs, cfg, episode_seed);
    if (!corrective_note.empty()) {
      bundle.turns.emplace_back("system", corrective_note);
      corrective_note.clear();
    }
    const std::string raw = gw.complete(bundle);  // fatal gateway errors propagate
    const auto parsed = core::parse_model_output(raw);

    core::Step step;
    step.index = i;
    step.obs_before = obs;

    HistoryEntry entry;
    entry.index = i;

    if (!parsed) {
      step.format_violation = true;
      step.thought = std::string(core::format_error_kind_name(parsed.error().kind)) + ": " +
                     parsed.error().detail;
      step.action = core::Action::wait();  // placeholder; keeps the obs chain intact
      corrective_note =
          "Format note: your previous reply was rejected (" +
          std::string(core::format_error_kind_name(parsed.error().kind)) +
          "). Reply with reasoning followed by exactly one action JSON object.";
      entry.thought = "(format violation)";
      entry.action_text = core::serialize_action(step.action);
      entry.exec_status_text =
          std::string("format_error(") + std::string(core::format_error_kind_name(parsed.error().kind)) + ")";
    } else {
      step.thought = parsed->thought;
      step.action = parsed->action;
      entry.thought = parsed->thought;
      entry.action_text = core::serialize_action(parsed->action);
    }

    try {
      step.exec_status = env.execute(step.action);
      step.obs_after = env.observe();  // always re-observe, even after failures
    } catch (const core::EnvError&) {
      traj.terminal = core::TerminalStatus::EnvFailure;
      return traj;
    }
    if (!step.format_violation)
      entry.exec_status_text = std::string(core::exec_status_name(step.exec_status));

    const bool answered = !step.format_violation && step.action.kind == core::ActionKind::Answer;
    const bool format_stop = step.format_violation && cfg.stop_on_format_error;
    obs = step.obs_after;
    history.push_back(std::move(entry));
    traj.steps.push_back(std::move(step));

    if (answered) {
      traj.terminal = core::TerminalStatus::Answered;
      traj.answer = traj.steps.back().action.text;
      return traj;
    }
    if (format_stop) {
      traj.terminal = core::TerminalStatus::Blocked;
      return traj;
    }
  }
  return traj;  // MaxStepsReached
}

std::vector<core::Trajectory> run_group(const core::TaskSpec& task,
                                        const core::EnvFactory& env_factory,
                                        gateway::Gateway& gw, const RolloutConfig& cfg) {
  const int group = std::max(1, task.group_size);

  auto run_one = [&](int index) -> core::Trajectory {
    try {
      std::unique_ptr<core::Environment> env = env_factory();
      if (!env) throw EpisodeError("run_group: environment factory returned null");
      return run_episode(task, *env, gw, cfg, cfg.seed_base + std::uint64_t(index));
    } catch (const Error&) {
      core::Trajectory failed;
      failed.task = task;
      failed.terminal = core::TerminalStatus::EnvFailure;
      return failed;
    }
  };

  std::vector<core::Trajectory> out(static_cast<std::size_t>(group));
  if (!cfg.parallel) {
    for (int i = 0; i < group; ++i) out[std::size_t(i)] = run_one(i);
    return out;
  }
  std::vector<std::future<core::Trajectory>> futures;
  futures.reserve(std::size_t(group));
  for (int i = 0; i < group; ++i) {
    futures.push_back(std::async(std::launch::async, run_one, i));
  }
  for (int i = 0; i < group; ++i) out[std::size_t(i)] = futures[std::size_t(i)].get();
  return out;
}

}  // namespace webrl::rollout

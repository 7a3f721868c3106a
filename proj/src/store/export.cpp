#include "webrl/store/export.hpp"

#include <fstream>
#include <sstream>

#include "webrl/core/wire.hpp"
#include "webrl/policy/math.hpp"
#include "webrl/util/strings.hpp"

namespace webrl::store {

using nlohmann::json;

namespace {

std::string response_text(const core::Trajectory& traj) {
  std::ostringstream out;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const core::Step& s = traj.steps[i];
    if (i > 0) out << "\n";
    out << "<think>" << s.thought << "</think>\n" << core::serialize_action(s.action);
  }
  return out.str();
}

}  // namespace

int export_grpo_batch(const TrajectoryStore& store, const std::string& run_id,
                      const std::filesystem::path& out_file, const ExportConfig& cfg) {
  const std::vector<StoredTrajectory> records = store.read_run(run_id);
  const std::map<std::string, json> rewards = store.read_rewards(run_id);

  struct Member {
    const StoredTrajectory* record;
    double reward;
  };
  // Group by task identity, preserving record order within each group.
  std::map<std::string, std::vector<Member>> groups;
  std::vector<std::string> group_order;

  for (const StoredTrajectory& rec : records) {
    const auto rit = rewards.find(rec.record_id);
    if (rit == rewards.end()) continue;  // unscored
    const json& rj = rit->second;
    const bool invalid = rj.value("invalid", false) ||
                         rj.value("judge_scores", json::object())
                                 .value("task_completion", 0) == -1;
    if (invalid) continue;  // discard rule: invalid trajectories never export

    double reward = 0.0;
    if (cfg.reward_source == "task_completion") {
      reward = double(rj.value("judge_scores", json::object()).value("task_completion", 0));
    } else {
      if (!rj.contains("total") || rj["total"].is_null()) continue;
      reward = rj["total"].get<double>();
    }
    const std::string key = rec.trajectory.task.query + "\n" + rec.trajectory.task.start_url;
    if (!groups.count(key)) group_order.push_back(key);
    groups[key].push_back({&rec, reward});
  }

  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError(StoreErrorKind::Io, "export: cannot open " + out_file.string());

  int written = 0;
  for (const std::string& key : group_order) {
    const std::vector<Member>& members = groups[key];
    Eigen::ArrayXd group_rewards(Eigen::Index(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i)
      group_rewards[Eigen::Index(i)] = members[i].reward;
    const Eigen::ArrayXd advantages = policy::group_advantages(
        {group_rewards, int(members.size())}, cfg.advantage_eps);

    for (std::size_t i = 0; i < members.size(); ++i) {
      const StoredTrajectory& rec = *members[i].record;
      const std::string response = response_text(rec.trajectory);

      // Placeholder token rows; the trainer fills logprobs/ref_logprobs, then
      // applies klcov_select with the recorded fraction to build the KL mask.
      json tokens = json::array();
      for (const std::string& tok : util::split_fields(response)) {
        tokens.push_back({{"text", tok},
                          {"logprob", nullptr},
                          {"ref_logprob", nullptr},
                          {"kl_mask", nullptr}});
      }

      json line;
      line["record_id"] = rec.record_id;
      line["group_index"] = rec.group_index;
      line["task"] = rec.trajectory.task.query;
      line["prompt"] = "Task: " + rec.trajectory.task.query +
                       "\nStart URL: " + rec.trajectory.task.start_url;
      line["response"] = response;
      line["reward"] = members[i].reward;
      line["advantage"] = advantages[Eigen::Index(i)];
      line["klcov_fraction"] = cfg.klcov_fraction;
      line["tokens"] = std::move(tokens);
      out << line.dump() << "\n";
      ++written;
    }
  }
  return written;
}

}  // namespace webrl::store

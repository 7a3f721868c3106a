#include "webrl/store/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "webrl/policy/math.hpp"

namespace webrl::store {

using nlohmann::json;

namespace {

std::optional<core::JudgeScores> scores_of(const StoredTrajectory& rec,
                                           const std::map<std::string, json>& rewards) {
  const auto it = rewards.find(rec.record_id);
  if (it != rewards.end() && it->second.contains("judge_scores")) {
    const json& s = it->second["judge_scores"];
    return core::JudgeScores{s.value("task_completion", 0), s.value("action_validity", 1),
                             s.value("trajectory_efficiency", 1)};
  }
  return rec.trajectory.judge_scores;
}

}  // namespace

EvalReport aggregate(const TrajectoryStore& store, const std::string& run_id,
                     int success_tc_threshold) {
  const std::vector<StoredTrajectory> records = store.read_run(run_id);
  const std::map<std::string, json> rewards = store.read_rewards(run_id);

  EvalReport report;
  report.model = store.read_manifest(run_id).config.value("model", "");

  struct Group {
    int total = 0;
    int successes = 0;
  };
  std::map<std::string, Group> groups;  // task identity -> rollout tallies
  std::map<std::string, std::pair<double, int>> domains;
  double sum = 0.0;

  for (const StoredTrajectory& rec : records) {
    const auto scores = scores_of(rec, rewards);
    if (!scores) continue;  // unscored records don't enter the report
    ++report.trajectory_count;

    const std::string task_key = rec.trajectory.task.query + "\n" +
                                 rec.trajectory.task.start_url + "\n" +
                                 rec.trajectory.task.domain;
    Group& g = groups[task_key];
    ++g.total;
    if (scores->task_completion >= success_tc_threshold) ++g.successes;

    if (scores->task_completion == -1) {
      ++report.invalid_count;
      continue;
    }
    const double tc = double(scores->task_completion);
    if (report.valid_count == 0) {
      report.max_score = report.min_score = tc;
    } else {
      report.max_score = std::max(report.max_score, tc);
      report.min_score = std::min(report.min_score, tc);
    }
    ++report.valid_count;
    sum += tc;
    auto& d = domains[rec.trajectory.task.domain];
    d.first += tc;
    d.second += 1;
  }

  if (report.trajectory_count == 0)
    throw StoreError(StoreErrorKind::Empty, "aggregate: run " + run_id + " has no scored trajectories");

  if (report.valid_count > 0) report.avg_score = sum / double(report.valid_count);
  for (const auto& [domain, acc] : domains) {
    report.per_domain_avg[domain] = acc.first / double(acc.second);
    report.per_domain_valid[domain] = acc.second;
  }

  int max_g = 0;
  for (const auto& [key, g] : groups) max_g = std::max(max_g, g.total);
  for (int k = 1; k <= max_g; ++k) {
    double acc = 0.0;
    int contributing = 0;
    for (const auto& [key, g] : groups) {
      if (g.total < k) continue;
      acc += policy::pass_at_k(g.total, g.successes, k);
      ++contributing;
    }
    if (contributing > 0) report.pass_at_k.emplace_back(k, acc / double(contributing));
  }
  return report;
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "model: " << (report.model.empty() ? "(unspecified)" : report.model) << "\n";
  out << "trajectories: " << report.trajectory_count << " (valid " << report.valid_count
      << ", invalid " << report.invalid_count << ")\n";
  if (report.valid_count > 0) {
    out << "score (5-point, valid only): max " << report.max_score << "  min "
        << report.min_score << "  avg " << report.avg_score << "\n";
  } else {
    out << "score (5-point, valid only): n/a (no valid trajectories)\n";
  }
  if (!report.per_domain_avg.empty()) {
    out << "per-domain average:\n";
    for (const auto& [domain, avg] : report.per_domain_avg) {
      out << "  " << std::left << std::setw(20) << (domain.empty() ? "(untagged)" : domain)
          << std::right << avg << "  (n=" << report.per_domain_valid.at(domain) << ")\n";
    }
  }
  if (!report.pass_at_k.empty()) {
    out << "pass@k:\n";
    for (const auto& [k, v] : report.pass_at_k) {
      out << "  pass@" << k << " = " << std::setprecision(4) << v << std::setprecision(2)
          << "\n";
    }
  }
  return out.str();
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "metric,key,value\n";
  out << "count,total," << report.trajectory_count << "\n";
  out << "count,valid," << report.valid_count << "\n";
  out << "count,invalid," << report.invalid_count << "\n";
  if (report.valid_count > 0) {
    out << "score,max," << report.max_score << "\n";
    out << "score,min," << report.min_score << "\n";
    out << "score,avg," << report.avg_score << "\n";
  }
  for (const auto& [domain, avg] : report.per_domain_avg)
    out << "domain_avg," << (domain.empty() ? "untagged" : domain) << "," << avg << "\n";
  for (const auto& [k, v] : report.pass_at_k) out << "pass_at_k," << k << "," << v << "\n";
  return out.str();
}

}  // namespace webrl::store

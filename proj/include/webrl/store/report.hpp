#pragma once

#include <map>
#include <string>
#include <vector>

#include "webrl/store/store.hpp"

namespace webrl::store {

// Evaluation aggregate over one run. Scores are the judge's task-completion
// values on the 5-point scale; trajectories with task_completion = -1 are
// invalid and excluded from max/min/avg and the per-domain rows.
struct EvalReport {
  std::string model;
  int trajectory_count = 0;
  int valid_count = 0;
  int invalid_count = 0;
  double max_score = 0.0;  // over valid trajectories
  double min_score = 0.0;
  double avg_score = 0.0;  // absent semantics when valid_count == 0
  std::map<std::string, double> per_domain_avg;
  std::map<std::string, int> per_domain_valid;
  // pass@k macro-averaged over task groups that ran at least k rollouts.
  std::vector<std::pair<int, double>> pass_at_k;
};

// Success predicate for pass@k: task_completion >= success_tc_threshold.
EvalReport aggregate(const TrajectoryStore& store, const std::string& run_id,
                     int success_tc_threshold = 4);

std::string report_text(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace webrl::store

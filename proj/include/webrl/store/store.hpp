#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "webrl/core/error.hpp"
#include "webrl/core/types.hpp"
#include "webrl/reward/reward.hpp"

namespace webrl::store {

enum class StoreErrorKind { Io, UnknownRun, Empty };

class StoreError : public Error {
 public:
  StoreError(StoreErrorKind kind, const std::string& what) : Error(what), kind(kind) {}
  StoreErrorKind kind;
};

struct RunManifest {
  std::string run_id;
  std::string created_at;  // ISO-8601 UTC
  nlohmann::json config;   // snapshot of every module config used for the run
  std::string task_file;
  std::string version;     // build/version stamp
};

// Trajectory record as stored: screenshots live in separate content-addressed
// image files; the record references them by pixel hash.
struct StoredTrajectory {
  std::string record_id;
  int group_index = 0;
  core::Trajectory trajectory;  // screenshots empty until hydrate()
  // One (before, after) hash pair per step, parallel to trajectory.steps.
  std::vector<std::pair<std::string, std::string>> image_hashes;
};

// Run-directory layout under the store root:
//   <run_id>/manifest.json
//   <run_id>/trajectories/t000001.json     (one record per file, temp+rename)
//   <run_id>/images/<pixel-hash>.png       (content-addressed, deduplicated)
//   <run_id>/rewards/t000001.json          (scores + breakdown, rewritable)
//   <run_id>/judge_cache/<key-hash>.json   (raw judge replies for replay)
// Appends are serialized through a per-run lock; every write is
// write-temp-then-rename so a reader never sees a torn record.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  void create_run(const RunManifest& manifest);
  bool run_exists(const std::string& run_id) const;
  RunManifest read_manifest(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  // Atomic append; returns the new record id ("t000001", ...).
  std::string append_trajectory(const std::string& run_id, const core::Trajectory& traj,
                                int group_index = 0);

  std::vector<StoredTrajectory> read_run(const std::string& run_id) const;
  std::optional<StoredTrajectory> read_record(const std::string& run_id,
                                              const std::string& record_id) const;

  // Loads the referenced screenshots back into the trajectory.
  void hydrate(const std::string& run_id, StoredTrajectory& record) const;
  core::Image load_image(const std::string& run_id, const std::string& hash) const;

  // Reward records (judge scores + breakdown); rewritten by reward replay.
  void put_reward(const std::string& run_id, const std::string& record_id,
                  const nlohmann::json& reward_record);
  std::optional<nlohmann::json> get_reward(const std::string& run_id,
                                           const std::string& record_id) const;
  std::map<std::string, nlohmann::json> read_rewards(const std::string& run_id) const;

  // Raw judge replies keyed by (trajectory hash, prompt version) so replay
  // never re-queries a model.
  void put_judge_cache(const std::string& run_id, const std::string& key,
                       const std::string& response);
  std::optional<std::string> get_judge_cache(const std::string& run_id,
                                             const std::string& key) const;

  static std::string image_hash(const core::Image& img);

 private:
  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path require_run(const std::string& run_id) const;
  std::mutex& run_lock(const std::string& run_id);

  std::filesystem::path root_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

// Canonical JSON for a trajectory record; key order is nlohmann's sorted
// order, so identical content yields identical bytes.
nlohmann::json trajectory_record_json(
    const core::Trajectory& traj, const std::string& record_id, int group_index,
    const std::vector<std::pair<std::string, std::string>>& image_hashes);

StoredTrajectory trajectory_record_from_json(const nlohmann::json& j);

// Stable content hash of a trajectory (task, thoughts, actions, image hashes);
// keys the judge cache.
std::string trajectory_content_hash(const StoredTrajectory& record);

std::string now_iso8601_utc();

}  // namespace webrl::store

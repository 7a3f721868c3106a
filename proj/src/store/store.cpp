#include "webrl/store/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "webrl/core/png_io.hpp"
#include "webrl/core/wire.hpp"
#include "webrl/util/sha256.hpp"

namespace webrl::store {

using nlohmann::json;

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError(StoreErrorKind::Io, "store: cannot open " + tmp.string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw StoreError(StoreErrorKind::Io, "store: short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError(StoreErrorKind::Io, "store: rename failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreErrorKind::Io, "store: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json load_json(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded())
    throw StoreError(StoreErrorKind::Io, "store: corrupt JSON in " + path.string());
  return j;
}

json observation_json(const core::Observation& obs, const std::string& image_hash) {
  json elements = json::array();
  for (const core::InteractableElement& el : obs.elements) {
    elements.push_back({{"role", std::string(core::element_role_name(el.role))},
                        {"name", el.name},
                        {"bbox", {el.bbox.x, el.bbox.y, el.bbox.width, el.bbox.height}}});
  }
  return {{"url", obs.url},
          {"captured_at", obs.captured_at},
          {"screenshot", image_hash},
          {"elements", std::move(elements)}};
}

core::Observation observation_from_json(const json& j, std::string* hash_out) {
  core::Observation obs;
  obs.url = j.value("url", "");
  obs.captured_at = j.value("captured_at", std::int64_t(0));
  if (hash_out) *hash_out = j.value("screenshot", "");
  for (const json& ej : j.value("elements", json::array())) {
    core::InteractableElement el;
    el.role = core::element_role_from_name(ej.value("role", "other"))
                  .value_or(core::ElementRole::Other);
    el.name = ej.value("name", "");
    const auto& b = ej["bbox"];
    el.bbox = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    obs.elements.push_back(std::move(el));
  }
  return obs;
}

}  // namespace

std::string now_iso8601_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json trajectory_record_json(const core::Trajectory& traj, const std::string& record_id,
                            int group_index,
                            const std::vector<std::pair<std::string, std::string>>& hashes) {
  json steps = json::array();
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const core::Step& s = traj.steps[i];
    json sj;
    sj["index"] = s.index;
    sj["thought"] = s.thought;
    sj["action"] = core::action_to_json(s.action);
    sj["exec_status"] = std::string(core::exec_status_name(s.exec_status));
    sj["format_violation"] = s.format_violation;
    if (s.step_reward) sj["step_reward"] = *s.step_reward;
    sj["obs_before"] = observation_json(s.obs_before, hashes[i].first);
    sj["obs_after"] = observation_json(s.obs_after, hashes[i].second);
    steps.push_back(std::move(sj));
  }

  json j;
  j["id"] = record_id;
  j["group_index"] = group_index;
  j["task"] = {{"query", traj.task.query},
               {"start_url", traj.task.start_url},
               {"domain", traj.task.domain},
               {"max_steps", traj.task.max_steps},
               {"group_size", traj.task.group_size}};
  j["steps"] = std::move(steps);
  j["terminal"] = std::string(core::terminal_status_name(traj.terminal));
  if (traj.answer) j["answer"] = *traj.answer;
  if (traj.judge_scores) {
    j["judge_scores"] = {{"task_completion", traj.judge_scores->task_completion},
                         {"action_validity", traj.judge_scores->action_validity},
                         {"trajectory_efficiency", traj.judge_scores->trajectory_efficiency}};
  }
  if (traj.total_reward) j["total_reward"] = *traj.total_reward;
  return j;
}

StoredTrajectory trajectory_record_from_json(const json& j) {
  StoredTrajectory rec;
  rec.record_id = j.value("id", "");
  rec.group_index = j.value("group_index", 0);

  const json& t = j.at("task");
  rec.trajectory.task = {t.value("query", ""), t.value("start_url", ""),
                         t.value("domain", ""), t.value("max_steps", 1),
                         t.value("group_size", 1)};

  for (const json& sj : j.value("steps", json::array())) {
    core::Step s;
    s.index = sj.value("index", 0);
    s.thought = sj.value("thought", "");
    if (const auto a = core::action_from_json(sj.at("action")); a) s.action = a.value();
    s.exec_status = core::exec_status_from_name(sj.value("exec_status", "ok"))
                        .value_or(core::ExecStatus::Ok);
    s.format_violation = sj.value("format_violation", false);
    if (sj.contains("step_reward")) s.step_reward = sj["step_reward"].get<double>();
    std::pair<std::string, std::string> hashes;
    s.obs_before = observation_from_json(sj.at("obs_before"), &hashes.first);
    s.obs_after = observation_from_json(sj.at("obs_after"), &hashes.second);
    rec.image_hashes.push_back(std::move(hashes));
    rec.trajectory.steps.push_back(std::move(s));
  }

  rec.trajectory.terminal = core::terminal_status_from_name(j.value("terminal", "env_failure"))
                                .value_or(core::TerminalStatus::EnvFailure);
  if (j.contains("answer")) rec.trajectory.answer = j["answer"].get<std::string>();
  if (j.contains("judge_scores")) {
    const json& s = j["judge_scores"];
    rec.trajectory.judge_scores = core::JudgeScores{
        s.value("task_completion", 0), s.value("action_validity", 1),
        s.value("trajectory_efficiency", 1)};
  }
  if (j.contains("total_reward")) rec.trajectory.total_reward = j["total_reward"].get<double>();
  return rec;
}

std::string trajectory_content_hash(const StoredTrajectory& record) {
  std::ostringstream key;
  key << record.trajectory.task.query << '\n' << record.trajectory.task.start_url << '\n';
  for (std::size_t i = 0; i < record.trajectory.steps.size(); ++i) {
    const core::Step& s = record.trajectory.steps[i];
    key << s.index << '|' << s.thought << '|' << core::serialize_action(s.action) << '|'
        << core::exec_status_name(s.exec_status) << '|' << record.image_hashes[i].first << '|'
        << record.image_hashes[i].second << '\n';
  }
  if (record.trajectory.answer) key << "answer:" << *record.trajectory.answer << '\n';
  return util::sha256_hex(key.str());
}

// ---------------------------------------------------------------------------
// TrajectoryStore
// ---------------------------------------------------------------------------

TrajectoryStore::TrajectoryStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw StoreError(StoreErrorKind::Io, "store: cannot create root " + root_.string());
}

std::filesystem::path TrajectoryStore::run_dir(const std::string& run_id) const {
  return root_ / run_id;
}

std::filesystem::path TrajectoryStore::require_run(const std::string& run_id) const {
  const std::filesystem::path dir = run_dir(run_id);
  if (!std::filesystem::exists(dir / "manifest.json"))
    throw StoreError(StoreErrorKind::UnknownRun, "store: unknown run " + run_id);
  return dir;
}

std::mutex& TrajectoryStore::run_lock(const std::string& run_id) {
  std::lock_guard<std::mutex> guard(locks_mu_);
  auto& slot = locks_[run_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void TrajectoryStore::create_run(const RunManifest& manifest) {
  if (manifest.run_id.empty())
    throw StoreError(StoreErrorKind::Io, "store: empty run id");
  const std::filesystem::path dir = run_dir(manifest.run_id);
  if (std::filesystem::exists(dir))
    throw StoreError(StoreErrorKind::Io, "store: run " + manifest.run_id + " already exists");
  std::filesystem::create_directories(dir / "trajectories");
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "rewards");
  std::filesystem::create_directories(dir / "judge_cache");

  json j;
  j["run_id"] = manifest.run_id;
  j["created_at"] = manifest.created_at;
  j["config"] = manifest.config;
  j["task_file"] = manifest.task_file;
  j["version"] = manifest.version;
  atomic_write(dir / "manifest.json", j.dump(2) + "\n");
}

bool TrajectoryStore::run_exists(const std::string& run_id) const {
  return std::filesystem::exists(run_dir(run_id) / "manifest.json");
}

RunManifest TrajectoryStore::read_manifest(const std::string& run_id) const {
  const json j = load_json(require_run(run_id) / "manifest.json");
  RunManifest m;
  m.run_id = j.value("run_id", run_id);
  m.created_at = j.value("created_at", "");
  m.config = j.value("config", json::object());
  m.task_file = j.value("task_file", "");
  m.version = j.value("version", "");
  return m;
}

std::vector<std::string> TrajectoryStore::list_runs() const {
  std::vector<std::string> runs;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json"))
      runs.push_back(entry.path().filename().string());
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

std::string TrajectoryStore::image_hash(const core::Image& img) {
  std::string header = std::to_string(img.width) + "x" + std::to_string(img.height) + ":";
  std::vector<std::uint8_t> keyed(header.begin(), header.end());
  keyed.insert(keyed.end(), img.rgb.begin(), img.rgb.end());
  return util::sha256_hex(keyed);
}

std::string TrajectoryStore::append_trajectory(const std::string& run_id,
                                               const core::Trajectory& traj, int group_index) {
  const std::filesystem::path dir = require_run(run_id);
  std::lock_guard<std::mutex> guard(run_lock(run_id));

  // Content-addressed screenshots, deduplicated by pixel hash.
  std::vector<std::pair<std::string, std::string>> hashes;
  auto persist = [&](const core::Image& img) -> std::string {
    if (img.empty()) return "";
    const std::string hash = image_hash(img);
    const std::filesystem::path file = dir / "images" / (hash + ".png");
    if (!std::filesystem::exists(file)) {
      const std::vector<std::uint8_t> png = core::png_encode(img);
      atomic_write(file, std::string(png.begin(), png.end()));
    }
    return hash;
  };
  for (const core::Step& s : traj.steps) {
    hashes.emplace_back(persist(s.obs_before.screenshot), persist(s.obs_after.screenshot));
  }

  // Next sequential id from the directory contents (crash-safe).
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "trajectories")) {
    if (entry.path().extension() == ".json") ++count;
  }
  char id[16];
  std::snprintf(id, sizeof(id), "t%06zu", count + 1);

  const json record = trajectory_record_json(traj, id, group_index, hashes);
  atomic_write(dir / "trajectories" / (std::string(id) + ".json"), record.dump() + "\n");
  return id;
}

std::vector<StoredTrajectory> TrajectoryStore::read_run(const std::string& run_id) const {
  const std::filesystem::path dir = require_run(run_id) / "trajectories";
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<StoredTrajectory> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(trajectory_record_from_json(load_json(f)));
  return out;
}

std::optional<StoredTrajectory> TrajectoryStore::read_record(const std::string& run_id,
                                                             const std::string& record_id) const {
  const std::filesystem::path file = require_run(run_id) / "trajectories" / (record_id + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  return trajectory_record_from_json(load_json(file));
}

core::Image TrajectoryStore::load_image(const std::string& run_id, const std::string& hash) const {
  return core::png_read_file(require_run(run_id) / "images" / (hash + ".png"));
}

void TrajectoryStore::hydrate(const std::string& run_id, StoredTrajectory& record) const {
  for (std::size_t i = 0; i < record.trajectory.steps.size(); ++i) {
    if (!record.image_hashes[i].first.empty())
      record.trajectory.steps[i].obs_before.screenshot =
          load_image(run_id, record.image_hashes[i].first);
    if (!record.image_hashes[i].second.empty())
      record.trajectory.steps[i].obs_after.screenshot =
          load_image(run_id, record.image_hashes[i].second);
  }
}

void TrajectoryStore::put_reward(const std::string& run_id, const std::string& record_id,
                                 const json& reward_record) {
  const std::filesystem::path dir = require_run(run_id);
  std::lock_guard<std::mutex> guard(run_lock(run_id));
  atomic_write(dir / "rewards" / (record_id + ".json"), reward_record.dump() + "\n");
}

std::optional<json> TrajectoryStore::get_reward(const std::string& run_id,
                                                const std::string& record_id) const {
  const std::filesystem::path file = require_run(run_id) / "rewards" / (record_id + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  return load_json(file);
}

std::map<std::string, json> TrajectoryStore::read_rewards(const std::string& run_id) const {
  const std::filesystem::path dir = require_run(run_id) / "rewards";
  std::map<std::string, json> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json")
      out[entry.path().stem().string()] = load_json(entry.path());
  }
  return out;
}

void TrajectoryStore::put_judge_cache(const std::string& run_id, const std::string& key,
                                      const std::string& response) {
  const std::filesystem::path dir = require_run(run_id);
  std::lock_guard<std::mutex> guard(run_lock(run_id));
  const json j = {{"key", key}, {"response", response}};
  atomic_write(dir / "judge_cache" / (util::sha256_hex(key) + ".json"), j.dump() + "\n");
}

std::optional<std::string> TrajectoryStore::get_judge_cache(const std::string& run_id,
                                                            const std::string& key) const {
  const std::filesystem::path file =
      require_run(run_id) / "judge_cache" / (util::sha256_hex(key) + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  return load_json(file).value("response", "");
}

}  // namespace webrl::store

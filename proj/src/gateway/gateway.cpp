#include "webrl/gateway/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "webrl/core/png_io.hpp"
#include "webrl/util/base64.hpp"
#include "webrl/util/sha256.hpp"
#include "webrl/util/strings.hpp"

namespace webrl::gateway {

using nlohmann::json;

ModelRequest PromptBundle::to_request() const {
  ModelRequest r;
  r.system = system;
  r.turns = turns;
  if (image) r.images.push_back(*image);
  r.generation = generation;
  return r;
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, bool strict)
    : script_(std::move(script)), strict_(strict) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(
    const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw GatewayError(GatewayErrorKind::BadResponse,
                              "scripted backend: cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw GatewayError(GatewayErrorKind::BadResponse,
                       "scripted backend: " + path.string() + " must be a JSON array");
  std::vector<ScriptEntry> script;
  for (const json& e : doc) {
    ScriptEntry entry;
    entry.match = e.value("match", "");
    entry.response = e.value("response", "");
    entry.is_regex = e.value("regex", false);
    script.push_back(std::move(entry));
  }
  return std::make_shared<ScriptedBackend>(std::move(script), strict);
}

std::string ScriptedBackend::matchable_text(const ModelRequest& request) {
  std::ostringstream out;
  out << request.system << '\n';
  for (const auto& [role, text] : request.turns) out << role << ": " << text << '\n';
  out << "[images=" << request.images.size() << "]";
  for (const core::Image& img : request.images) {
    out << "[image " << img.width << "x" << img.height << " #"
        << util::sha256_hex(img.rgb).substr(0, 8) << "]";
  }
  if (request.generation.seed) out << "[seed=" << *request.generation.seed << "]";
  return out.str();
}

std::string ScriptedBackend::complete(const ModelRequest& request) {
  const std::string text = matchable_text(request);
  std::lock_guard<std::mutex> lock(mu_);
  for (const ScriptEntry& entry : script_) {
    const bool hit = entry.is_regex
                         ? std::regex_search(text, std::regex(entry.match))
                         : (entry.match.empty() || text.find(entry.match) != std::string::npos);
    if (hit) return entry.response;
  }
  if (strict_)
    throw GatewayError(GatewayErrorKind::BadResponse,
                       "scripted backend: no script entry matches prompt");
  return {};
}

// ---------------------------------------------------------------------------
// HttpBackend
// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(GatewayConfig cfg) : cfg_(std::move(cfg)) {}

// Implementation lives in http_backend.cpp (pulls in cpp-httplib).

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayConfig cfg, std::shared_ptr<ModelBackend> backend)
    : cfg_(std::move(cfg)), backend_(std::move(backend)) {
  if (cfg_.retry.max_attempts < 1)
    throw GatewayError(GatewayErrorKind::BadResponse, "gateway: max_attempts must be >= 1");
  if (!backend_) throw GatewayError(GatewayErrorKind::BadResponse, "gateway: null backend");
}

std::shared_ptr<Gateway> Gateway::from_config(const GatewayConfig& cfg) {
  std::shared_ptr<ModelBackend> backend;
  if (cfg.backend == "scripted") {
    if (cfg.script_path.empty())
      throw GatewayError(GatewayErrorKind::BadResponse,
                         "gateway: scripted backend needs script_path");
    backend = ScriptedBackend::from_file(cfg.script_path, cfg.script_strict);
  } else if (cfg.backend == "http") {
    backend = std::make_shared<HttpBackend>(cfg);
  } else {
    throw GatewayError(GatewayErrorKind::BadResponse,
                       "gateway: unknown backend \"" + cfg.backend + "\"");
  }
  return std::make_shared<Gateway>(cfg, std::move(backend));
}

std::string Gateway::complete(const PromptBundle& bundle) {
  const ModelRequest request = bundle.to_request();
  // PromptBundle's type already bounds this; keep the dynamic check anyway.
  if (request.images.size() > 1)
    throw GatewayError(GatewayErrorKind::BadResponse, "policy bundle with multiple images");
  return complete_request(request);
}

std::string Gateway::complete_request(const ModelRequest& request) {
  const std::string request_id =
      util::sha256_hex(ScriptedBackend::matchable_text(request)).substr(0, 16);
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      std::string reply = backend_->complete(request);
      log_exchange(request_id, request, "ok", attempt);
      return reply;
    } catch (const GatewayError& e) {
      const bool retryable = e.kind == GatewayErrorKind::Transport ||
                             e.kind == GatewayErrorKind::RateLimited;
      if (!retryable || attempt >= cfg_.retry.max_attempts) {
        log_exchange(request_id, request, std::string("error: ") + e.what(), attempt);
        throw;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(
          std::int64_t(attempt) * cfg_.retry.backoff_ms));
    }
  }
}

std::string Gateway::load_prompt(const std::string& name) const {
  const std::filesystem::path path = std::filesystem::path(cfg_.prompt_dir) / name;
  std::ifstream in(path);
  if (!in)
    throw GatewayError(GatewayErrorKind::BadResponse,
                       "gateway: missing prompt asset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Gateway::log_exchange(const std::string& request_id, const ModelRequest& request,
                           const std::string& outcome, int attempts) const {
  if (cfg_.log_dir.empty()) return;
  json line;
  line["request_id"] = request_id;
  line["model"] = cfg_.model_name;
  line["attempts"] = attempts;
  line["system"] = request.system;
  json turns = json::array();
  for (const auto& [role, text] : request.turns) turns.push_back({{"role", role}, {"text", text}});
  line["turns"] = std::move(turns);
  line["images"] = request.images.size();  // pixel data stays out of the log
  line["outcome"] = outcome;

  std::lock_guard<std::mutex> lock(log_mu_);
  std::error_code ec;
  std::filesystem::create_directories(cfg_.log_dir, ec);
  std::ofstream out(std::filesystem::path(cfg_.log_dir) / "gateway.jsonl", std::ios::app);
  out << line.dump() << '\n';
}

std::optional<core::JudgeScores> parse_judge_scores(const std::string& text,
                                                    bool clamp_with_warning) {
  static const std::regex tc_re(R"(TC\s*=\s*(-?\d+))");
  static const std::regex av_re(R"(AV\s*=\s*(-?\d+))");
  static const std::regex te_re(R"(TE\s*=\s*(-?\d+))");
  std::smatch tc, av, te;
  if (!std::regex_search(text, tc, tc_re) || !std::regex_search(text, av, av_re) ||
      !std::regex_search(text, te, te_re)) {
    return std::nullopt;
  }
  auto clamp = [&](const char* dim, int v, int lo, int hi) {
    if (v < lo || v > hi) {
      if (clamp_with_warning)
        std::cerr << "[gateway] judge " << dim << "=" << v << " outside [" << lo << ","
                  << hi << "], clamping\n";
      return std::min(std::max(v, lo), hi);
    }
    return v;
  };
  core::JudgeScores s;
  s.task_completion = clamp("TC", std::stoi(tc[1]), -1, 5);
  s.action_validity = clamp("AV", std::stoi(av[1]), 1, 5);
  s.trajectory_efficiency = clamp("TE", std::stoi(te[1]), 1, 5);
  return s;
}

core::JudgeScores Gateway::judge_outcome(const std::string& query,
                                         std::span<const core::Image> screenshots,
                                         const std::optional<std::string>& final_answer) {
  if (screenshots.empty())
    throw GatewayError(GatewayErrorKind::BadResponse, "judge_outcome: no screenshots");

  // Long trajectories: evenly spaced subsample that keeps first and last.
  std::vector<core::Image> sampled;
  const std::size_t cap = std::size_t(std::max(1, cfg_.judge_screenshot_cap));
  if (screenshots.size() <= cap) {
    sampled.assign(screenshots.begin(), screenshots.end());
  } else {
    for (std::size_t i = 0; i < cap; ++i) {
      const std::size_t idx = i * (screenshots.size() - 1) / (cap - 1);
      sampled.push_back(screenshots[idx]);
    }
  }

  ModelRequest request;
  request.system = load_prompt("webjudge_outcome_v1.txt");
  std::ostringstream user;
  user << "Task: " << query << "\n";
  user << "Final answer: " << (final_answer ? *final_answer : "(none)") << "\n";
  user << "Screenshots: " << sampled.size() << " frames attached in order.";
  request.turns.emplace_back("user", user.str());
  request.images = std::move(sampled);
  request.generation.temperature = 0.0;

  std::string reply = complete_request(request);
  auto scores = parse_judge_scores(reply);
  if (!scores) {
    request.turns.emplace_back("assistant", reply);
    request.turns.emplace_back(
        "user", "Your reply was unparseable. Respond with exactly one line of the form "
                "TC=<int> AV=<int> TE=<int>.");
    reply = complete_request(request);
    scores = parse_judge_scores(reply);
  }
  if (!scores) throw JudgeParseError("judge_outcome: unparseable scores after re-ask");
  return *scores;
}

bool Gateway::judge_progress(const std::string& query, const core::Image& before,
                             const core::Image& after) {
  ModelRequest request;
  request.system = load_prompt("webjudge_progress_v1.txt");
  request.turns.emplace_back(
      "user", "Task: " + query +
                  "\nThe two screenshots are the page before and after the action. "
                  "Does the change represent meaningful progress toward the task? "
                  "Answer YES or NO.");
  request.images = {before, after};
  request.generation.temperature = 0.0;

  const std::string reply = complete_request(request);
  // First explicit yes/no marker decides; anything else is a conservative no.
  static const std::regex yn_re(R"(\b(yes|no)\b)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(reply, m, yn_re)) return util::iequals(m[1].str(), "yes");
  return false;
}

std::vector<std::string> Gateway::generate_queries(const std::string& url, int n,
                                                   const std::string& domain) {
  if (n < 1) throw GatewayError(GatewayErrorKind::BadResponse, "generate_queries: n must be >= 1");

  ModelRequest request;
  request.system = load_prompt("querygen_v1.txt");
  std::ostringstream user;
  user << "Site: " << url << "\nDomain: " << domain << "\n"
       << "Write up to " << n << " distinct tasks, one per line.";
  request.turns.emplace_back("user", user.str());

  const std::string reply = complete_request(request);
  std::vector<std::string> queries;
  std::set<std::string> seen;
  for (const std::string& raw_line : util::split_lines(reply)) {
    std::string line = util::trim(raw_line);
    // Tolerate "- task" and "3. task" list markers.
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) line = util::trim(line.substr(1));
    else {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')'))
        line = util::trim(line.substr(i + 1));
    }
    if (line.empty()) continue;
    if (!seen.insert(line).second) continue;  // exact duplicates removed
    queries.push_back(line);
    if (int(queries.size()) == n) break;
  }
  return queries;  // may be fewer than n; never padded
}

}  // namespace webrl::gateway

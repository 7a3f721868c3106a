#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "webrl/core/error.hpp"
#include "webrl/core/types.hpp"

namespace webrl::gateway {

enum class GatewayErrorKind { Transport, Auth, RateLimited, BadResponse };

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& what) : Error(what), kind(kind) {}
  GatewayErrorKind kind;
};

// Judge output that stayed unparseable after the one permitted re-ask.
class JudgeParseError : public GatewayError {
 public:
  explicit JudgeParseError(const std::string& what)
      : GatewayError(GatewayErrorKind::BadResponse, what) {}
};

struct Generation {
  int max_tokens = 1024;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
};

// Internal wire request. Judge paths may attach several images; the policy
// path goes through PromptBundle, which admits at most one by construction.
struct ModelRequest {
  std::string system;
  std::vector<std::pair<std::string, std::string>> turns;  // (role, text)
  std::vector<core::Image> images;
  Generation generation;
};

struct PromptBundle {
  std::string system;
  std::vector<std::pair<std::string, std::string>> turns;
  std::optional<core::Image> image;  // the type enforces the <=1 image rule
  Generation generation;

  ModelRequest to_request() const;
};

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_ms = 200;  // attempt i sleeps i * backoff_ms
};

struct GatewayConfig {
  std::string base_url;
  std::string model_name;
  std::string auth_env;  // name of the environment variable holding the token
  RetryPolicy retry;
  int timeout_ms = 60000;
  std::string backend = "scripted";  // "scripted" | "http"
  std::string script_path;           // scripted backend source
  bool script_strict = true;
  std::string log_dir;     // request/response log destination, empty = off
  std::string prompt_dir;  // judge + role prompt assets
  int judge_screenshot_cap = 20;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  // Returns the model's text reply; throws GatewayError.
  virtual std::string complete(const ModelRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend: ordered (matcher, response) pairs over the prompt text.
// Matching is deterministic and stateless, so gateway-dependent tests are
// bit-reproducible; a mutex serializes matching to preserve script order
// semantics under concurrent calls.
// ---------------------------------------------------------------------------

struct ScriptEntry {
  std::string match;  // substring, or ECMAScript regex when is_regex
  std::string response;
  bool is_regex = false;
};

class ScriptedBackend : public ModelBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> script, bool strict = true);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path,
                                                    bool strict = true);

  std::string complete(const ModelRequest& request) override;

  // Text the matchers see: system + turns + image digests + generation seed.
  static std::string matchable_text(const ModelRequest& request);

 private:
  std::vector<ScriptEntry> script_;
  bool strict_;
  std::mutex mu_;
};

// Chat-completion-style HTTP JSON endpoint. Images travel as base64 PNG data
// URLs; the bearer token is read from the configured environment variable at
// call time and never logged.
class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(GatewayConfig cfg);
  std::string complete(const ModelRequest& request) override;

 private:
  GatewayConfig cfg_;
};

// ---------------------------------------------------------------------------
// Gateway: the single chokepoint for all external model calls.
// ---------------------------------------------------------------------------

class Gateway {
 public:
  Gateway(GatewayConfig cfg, std::shared_ptr<ModelBackend> backend);

  // Builds the backend named by cfg.backend.
  static std::shared_ptr<Gateway> from_config(const GatewayConfig& cfg);

  const GatewayConfig& config() const { return cfg_; }

  // Policy-path completion. Retries Transport/RateLimited failures per the
  // retry policy; logs every request with a stable request id.
  std::string complete(const PromptBundle& bundle);

  // Raw-request path shared by the judge and query-generation ops.
  std::string complete_request(const ModelRequest& request);

  // Three-dimension outcome rubric over the trajectory's screenshots. Scores
  // are clamped into range with a warning; output that stays unparseable
  // after one re-ask raises JudgeParseError.
  core::JudgeScores judge_outcome(const std::string& query,
                                  std::span<const core::Image> screenshots,
                                  const std::optional<std::string>& final_answer);

  // True iff the judge answers with an explicit yes; anything else
  // (including garbage) counts as no.
  bool judge_progress(const std::string& query, const core::Image& before,
                      const core::Image& after);

  // Up to n distinct task queries for a site; never padded.
  std::vector<std::string> generate_queries(const std::string& url, int n,
                                            const std::string& domain);

 private:
  std::string load_prompt(const std::string& name) const;
  void log_exchange(const std::string& request_id, const ModelRequest& request,
                    const std::string& outcome, int attempts) const;

  GatewayConfig cfg_;
  std::shared_ptr<ModelBackend> backend_;
  mutable std::mutex log_mu_;
};

// Parses "TC=a AV=b TE=c" (tolerating surrounding prose); nullopt when any
// dimension is missing. Exposed for tests.
std::optional<core::JudgeScores> parse_judge_scores(const std::string& text,
                                                    bool clamp_with_warning = true);

// Version tag folded into judge cache keys; bump when the rubric assets change.
inline constexpr const char* kJudgePromptVersion = "v1";

}  // namespace webrl::gateway

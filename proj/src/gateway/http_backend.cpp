#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "webrl/core/png_io.hpp"
#include "webrl/gateway/gateway.hpp"
#include "webrl/util/base64.hpp"

namespace webrl::gateway {

using nlohmann::json;

namespace {

json content_parts(const std::string& text, const std::vector<core::Image>& images) {
  json parts = json::array();
  parts.push_back({{"type", "text"}, {"text", text}});
  for (const core::Image& img : images) {
    const std::vector<std::uint8_t> png = core::png_encode(img);
    parts.push_back({{"type", "image_url"},
                     {"image_url",
                      {{"url", "data:image/png;base64," + util::base64_encode(png)}}}});
  }
  return parts;
}

}  // namespace

std::string HttpBackend::complete(const ModelRequest& request) {
  static const std::regex url_re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.base_url, m, url_re))
    throw GatewayError(GatewayErrorKind::Transport,
                       "http backend: bad base_url " + cfg_.base_url);
  const bool https = m[1] == "https";
  const std::string host = m[2];
  const int port = m[3].matched ? std::stoi(m[3]) : (https ? 443 : 80);
  const std::string prefix = m[4].matched ? m[4].str() : "";

  json body;
  body["model"] = cfg_.model_name;
  json messages = json::array();
  if (!request.system.empty())
    messages.push_back({{"role", "system"}, {"content", request.system}});
  // Images ride on the last user turn, chat-completion vision style.
  for (std::size_t i = 0; i < request.turns.size(); ++i) {
    const auto& [role, text] = request.turns[i];
    const bool last_user = role == "user" && i + 1 == request.turns.size();
    if (last_user && !request.images.empty()) {
      messages.push_back({{"role", role}, {"content", content_parts(text, request.images)}});
    } else {
      messages.push_back({{"role", role}, {"content", text}});
    }
  }
  body["messages"] = std::move(messages);
  body["max_tokens"] = request.generation.max_tokens;
  body["temperature"] = request.generation.temperature;
  if (request.generation.seed) body["seed"] = *request.generation.seed;

  httplib::Headers headers;
  if (!cfg_.auth_env.empty()) {
    if (const char* token = std::getenv(cfg_.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  httplib::Client client(host, port);
  client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
  client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

  const auto res =
      client.Post(prefix + "/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res)
    throw GatewayError(GatewayErrorKind::Transport,
                       "http backend: transport failure to " + cfg_.base_url);
  if (res->status == 401 || res->status == 403)
    throw GatewayError(GatewayErrorKind::Auth, "http backend: authentication rejected");
  if (res->status == 429)
    throw GatewayError(GatewayErrorKind::RateLimited, "http backend: rate limited");
  if (res->status < 200 || res->status >= 300)
    throw GatewayError(GatewayErrorKind::Transport,
                       "http backend: status " + std::to_string(res->status));

  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
      !reply["choices"][0].contains("message") ||
      !reply["choices"][0]["message"].contains("content") ||
      !reply["choices"][0]["message"]["content"].is_string()) {
    throw GatewayError(GatewayErrorKind::BadResponse, "http backend: malformed completion body");
  }
  return reply["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace webrl::gateway

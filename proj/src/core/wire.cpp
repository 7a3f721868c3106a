#include "webrl/core/wire.hpp"

#include "webrl/util/strings.hpp"

namespace webrl::core {

using nlohmann::json;

std::string_view format_error_kind_name(FormatErrorKind k) {
  switch (k) {
    case FormatErrorKind::MissingThought: return "missing_thought";
    case FormatErrorKind::MissingAction: return "missing_action";
    case FormatErrorKind::MalformedAction: return "malformed_action";
    case FormatErrorKind::MultipleActions: return "multiple_actions";
  }
  return "malformed_action";
}

nlohmann::json action_to_json(const Action& a) {
  json j;
  j["action"] = std::string(action_kind_name(a.kind));
  if (a.point) {
    j["x"] = a.point->x;
    j["y"] = a.point->y;
  }
  if (a.text) j["text"] = *a.text;
  if (a.url) j["url"] = *a.url;
  if (a.scroll_delta) j["delta"] = *a.scroll_delta;
  return j;
}

std::string serialize_action(const Action& a) { return action_to_json(a).dump(); }

util::Expected<Action, std::string> action_from_json(const json& j) {
  if (!j.is_object()) return std::string("not an object");
  if (!j.contains("action") || !j["action"].is_string())
    return std::string("missing \"action\" key");

  const auto kind = action_kind_from_name(j["action"].get<std::string>());
  if (!kind) return "unknown action kind \"" + j["action"].get<std::string>() + "\"";

  Action a;
  a.kind = *kind;
  bool has_x = false, has_y = false;
  int x = 0, y = 0;
  for (const auto& [key, value] : j.items()) {
    if (key == "action") continue;
    if (key == "x" && value.is_number_integer()) {
      x = value.get<int>();
      has_x = true;
    } else if (key == "y" && value.is_number_integer()) {
      y = value.get<int>();
      has_y = true;
    } else if (key == "text" && value.is_string()) {
      a.text = value.get<std::string>();
    } else if (key == "url" && value.is_string()) {
      a.url = value.get<std::string>();
    } else if (key == "delta" && value.is_number_integer()) {
      a.scroll_delta = value.get<int>();
    } else {
      return "unexpected or ill-typed key \"" + key + "\"";
    }
  }
  if (has_x != has_y) return std::string("x and y must appear together");
  if (has_x) a.point = Point{x, y};

  if (const std::string v = payload_violation(a); !v.empty()) return v;
  return a;
}

namespace {

// Balanced top-level {...} spans outside string literals.
struct BraceSpan {
  std::size_t begin;
  std::size_t end;  // one past the closing brace
};

std::vector<BraceSpan> scan_brace_spans(std::string_view text) {
  std::vector<BraceSpan> spans;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      if (depth > 0) in_string = true;
      continue;
    }
    if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}') {
      if (depth > 0 && --depth == 0) spans.push_back({start, i + 1});
    }
  }
  return spans;
}

}  // namespace

util::Expected<ParsedOutput, FormatError> parse_model_output(std::string_view raw) {
  struct Candidate {
    BraceSpan span;
    std::optional<json> parsed;  // parse-ok candidates only
  };

  // An "action object" is any balanced brace span that either parses as JSON
  // with an "action" key, or fails to parse but names one.
  std::vector<Candidate> candidates;
  for (const BraceSpan& span : scan_brace_spans(raw)) {
    const std::string_view body = raw.substr(span.begin, span.end - span.begin);
    json parsed = json::parse(body, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("action")) {
      candidates.push_back({span, std::move(parsed)});
    } else if (parsed.is_discarded() && body.find("\"action\"") != std::string_view::npos) {
      candidates.push_back({span, std::nullopt});
    }
  }

  if (candidates.empty())
    return FormatError{FormatErrorKind::MissingAction, "no action object found"};
  if (candidates.size() > 1)
    return FormatError{FormatErrorKind::MultipleActions,
                       std::to_string(candidates.size()) + " action objects found"};

  const Candidate& c = candidates.front();

  // Thought: explicit <think> block wins; otherwise the text before the action.
  std::string thought;
  const std::size_t open = raw.find("<think>");
  const std::size_t close = raw.find("</think>");
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    thought = util::trim(raw.substr(open + 7, close - open - 7));
  } else {
    thought = util::trim(raw.substr(0, c.span.begin));
  }
  if (thought.empty())
    return FormatError{FormatErrorKind::MissingThought, "no reasoning segment before the action"};

  if (!c.parsed)
    return FormatError{FormatErrorKind::MalformedAction, "action object is not valid JSON"};
  auto action = action_from_json(*c.parsed);
  if (!action) return FormatError{FormatErrorKind::MalformedAction, action.error()};

  return ParsedOutput{std::move(thought), std::move(action.value())};
}

}  // namespace webrl::core

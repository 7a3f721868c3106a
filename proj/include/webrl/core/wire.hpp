#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "webrl/core/types.hpp"
#include "webrl/util/expected.hpp"

namespace webrl::core {

// Canonical action wire form: a single-line JSON object with key "action"
// (lowercase snake_case kind) plus payload keys x, y, text, url, delta.
// The thought segment is the text preceding the JSON object, or the content
// of an explicit <think>...</think> block when present.

enum class FormatErrorKind { MissingThought, MissingAction, MalformedAction, MultipleActions };

std::string_view format_error_kind_name(FormatErrorKind k);

struct FormatError {
  FormatErrorKind kind;
  std::string detail;
};

struct ParsedOutput {
  std::string thought;
  Action action;
};

// Extracts one reasoning segment and exactly one structured action from raw
// model text. Errors signal a format-reward violation, not a crash.
// Checks run in order: action presence, action multiplicity, thought presence,
// action well-formedness.
util::Expected<ParsedOutput, FormatError> parse_model_output(std::string_view raw);

// Canonical single-line form; parse of the result yields an equal Action.
std::string serialize_action(const Action& a);

nlohmann::json action_to_json(const Action& a);

// Strict: rejects unknown keys, wrong-kind payloads, and negative coordinates.
util::Expected<Action, std::string> action_from_json(const nlohmann::json& j);

}  // namespace webrl::core

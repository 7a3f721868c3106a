#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webrl/core/image.hpp"

namespace webrl::core {

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

enum class ActionKind { Click, Type, Scroll, Hover, Navigate, GoBack, Wait, Answer };

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

// One semantic browser operation. Payload rules per kind:
//   Click/Hover : point only
//   Type        : point + text
//   Scroll      : scroll_delta only (vertical pixels, positive scrolls down)
//   Navigate    : url only
//   Answer      : text only
//   Wait/GoBack : no payload
struct Action {
  ActionKind kind = ActionKind::Wait;
  std::optional<Point> point;
  std::optional<std::string> text;
  std::optional<std::string> url;
  std::optional<int> scroll_delta;

  bool operator==(const Action&) const = default;

  static Action click(int x, int y);
  static Action hover(int x, int y);
  static Action type_text(int x, int y, std::string text);
  static Action scroll(int delta);
  static Action navigate(std::string url);
  static Action go_back();
  static Action wait();
  static Action answer(std::string text);
};

// Empty string when the payload satisfies the per-kind rules (including
// non-negative coordinates); otherwise a short description of the violation.
std::string payload_violation(const Action& a);
inline bool payload_valid(const Action& a) { return payload_violation(a).empty(); }

// True when every coordinate in the action lies inside viewport_w x viewport_h.
bool bounded_by(const Action& a, int viewport_w, int viewport_h);

std::string_view action_kind_name(ActionKind k);
std::optional<ActionKind> action_kind_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Page elements and observations
// ---------------------------------------------------------------------------

enum class ElementRole { Button, Link, Input, Select, Checkbox, MenuItem, Other };

std::string_view element_role_name(ElementRole r);
std::optional<ElementRole> element_role_from_name(std::string_view name);

struct BBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  // Half-open containment: x in [bx, bx+w), y in [by, by+h).
  bool contains(Point p) const {
    return p.x >= x && p.x < x + width && p.y >= y && p.y < y + height;
  }
  long long area() const { return 1LL * width * height; }
  bool operator==(const BBox&) const = default;
};

struct InteractableElement {
  ElementRole role = ElementRole::Other;
  std::string name;
  BBox bbox;
  bool operator==(const InteractableElement&) const = default;
};

// Matching element for a viewport point, if any. Ties broken by smallest bbox
// area, then by latest list position (topmost in paint order).
std::optional<InteractableElement> hit_test(Point p,
                                            std::span<const InteractableElement> elements);

struct Observation {
  Image screenshot;
  std::string url;
  std::vector<InteractableElement> elements;
  // Monotonic per environment. The simulated site uses a logical capture
  // counter so stored records stay byte-reproducible.
  std::int64_t captured_at = 0;
  bool operator==(const Observation&) const = default;
};

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

enum class ExecStatus { Ok, ExecutionFailed, Timeout };

std::string_view exec_status_name(ExecStatus s);
std::optional<ExecStatus> exec_status_from_name(std::string_view name);

struct Step {
  int index = 0;
  std::string thought;
  Action action;
  Observation obs_before;
  Observation obs_after;
  ExecStatus exec_status = ExecStatus::Ok;
  std::optional<double> step_reward;
  // Set when the policy reply failed the output grammar this turn; the action
  // is then a placeholder Wait.
  bool format_violation = false;
};

enum class TerminalStatus { Answered, MaxStepsReached, EnvFailure, Blocked };

std::string_view terminal_status_name(TerminalStatus s);
std::optional<TerminalStatus> terminal_status_from_name(std::string_view name);

// Outcome-judge triple. task_completion = -1 marks the trajectory invalid
// (insurmountable external obstacle); such trajectories are excluded from
// training batches and report averages.
struct JudgeScores {
  int task_completion = 0;       // [-1, 5]
  int action_validity = 1;       // [1, 5]
  int trajectory_efficiency = 1; // [1, 5]
  bool operator==(const JudgeScores&) const = default;
};

struct TaskSpec {
  std::string query;
  std::string start_url;
  std::string domain;
  int max_steps = 30;
  int group_size = 1;
  bool operator==(const TaskSpec&) const = default;
};

struct Trajectory {
  TaskSpec task;
  std::vector<Step> steps;
  TerminalStatus terminal = TerminalStatus::EnvFailure;
  std::optional<std::string> answer;
  std::optional<JudgeScores> judge_scores;
  std::optional<double> total_reward;
};

}  // namespace webrl::core

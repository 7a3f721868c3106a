#include "webrl/core/types.hpp"

namespace webrl::core {

Action Action::click(int x, int y) {
  Action a;
  a.kind = ActionKind::Click;
  a.point = Point{x, y};
  return a;
}

Action Action::hover(int x, int y) {
  Action a;
  a.kind = ActionKind::Hover;
  a.point = Point{x, y};
  return a;
}

Action Action::type_text(int x, int y, std::string text) {
  Action a;
  a.kind = ActionKind::Type;
  a.point = Point{x, y};
  a.text = std::move(text);
  return a;
}

Action Action::scroll(int delta) {
  Action a;
  a.kind = ActionKind::Scroll;
  a.scroll_delta = delta;
  return a;
}

Action Action::navigate(std::string url) {
  Action a;
  a.kind = ActionKind::Navigate;
  a.url = std::move(url);
  return a;
}

Action Action::go_back() {
  Action a;
  a.kind = ActionKind::GoBack;
  return a;
}

Action Action::wait() {
  Action a;
  a.kind = ActionKind::Wait;
  return a;
}

Action Action::answer(std::string text) {
  Action a;
  a.kind = ActionKind::Answer;
  a.text = std::move(text);
  return a;
}

std::string payload_violation(const Action& a) {
  const bool has_point = a.point.has_value();
  const bool has_text = a.text.has_value();
  const bool has_url = a.url.has_value();
  const bool has_delta = a.scroll_delta.has_value();

  if (has_point && (a.point->x < 0 || a.point->y < 0)) return "negative coordinates";

  auto expect = [&](bool point, bool text, bool url, bool delta) -> std::string {
    if (has_point != point) return point ? "missing point" : "unexpected point";
    if (has_text != text) return text ? "missing text" : "unexpected text";
    if (has_url != url) return url ? "missing url" : "unexpected url";
    if (has_delta != delta) return delta ? "missing delta" : "unexpected delta";
    return {};
  };

  switch (a.kind) {
    case ActionKind::Click:
    case ActionKind::Hover:
      return expect(true, false, false, false);
    case ActionKind::Type:
      return expect(true, true, false, false);
    case ActionKind::Scroll:
      return expect(false, false, false, true);
    case ActionKind::Navigate:
      return expect(false, false, true, false);
    case ActionKind::Answer:
      return expect(false, true, false, false);
    case ActionKind::GoBack:
    case ActionKind::Wait:
      return expect(false, false, false, false);
  }
  return "unknown action kind";
}

bool bounded_by(const Action& a, int viewport_w, int viewport_h) {
  if (!a.point) return true;
  return a.point->x >= 0 && a.point->x < viewport_w && a.point->y >= 0 &&
         a.point->y < viewport_h;
}

std::string_view action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Click: return "click";
    case ActionKind::Type: return "type";
    case ActionKind::Scroll: return "scroll";
    case ActionKind::Hover: return "hover";
    case ActionKind::Navigate: return "navigate";
    case ActionKind::GoBack: return "go_back";
    case ActionKind::Wait: return "wait";
    case ActionKind::Answer: return "answer";
  }
  return "unknown";
}

std::optional<ActionKind> action_kind_from_name(std::string_view name) {
  if (name == "click") return ActionKind::Click;
  if (name == "type") return ActionKind::Type;
  if (name == "scroll") return ActionKind::Scroll;
  if (name == "hover") return ActionKind::Hover;
  if (name == "navigate") return ActionKind::Navigate;
  if (name == "go_back") return ActionKind::GoBack;
  if (name == "wait") return ActionKind::Wait;
  if (name == "answer") return ActionKind::Answer;
  return std::nullopt;
}

std::string_view element_role_name(ElementRole r) {
  switch (r) {
    case ElementRole::Button: return "button";
    case ElementRole::Link: return "link";
    case ElementRole::Input: return "input";
    case ElementRole::Select: return "select";
    case ElementRole::Checkbox: return "checkbox";
    case ElementRole::MenuItem: return "menu_item";
    case ElementRole::Other: return "other";
  }
  return "other";
}

std::optional<ElementRole> element_role_from_name(std::string_view name) {
  if (name == "button") return ElementRole::Button;
  if (name == "link") return ElementRole::Link;
  if (name == "input") return ElementRole::Input;
  if (name == "select") return ElementRole::Select;
  if (name == "checkbox") return ElementRole::Checkbox;
  if (name == "menu_item") return ElementRole::MenuItem;
  if (name == "other") return ElementRole::Other;
  return std::nullopt;
}

std::optional<InteractableElement> hit_test(Point p,
                                            std::span<const InteractableElement> elements) {
  const InteractableElement* best = nullptr;
  for (const auto& el : elements) {
    if (!el.bbox.contains(p)) continue;
    // Smaller area wins; equal area resolved by later list position.
    if (best == nullptr || el.bbox.area() <= best->bbox.area()) best = &el;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

std::string_view exec_status_name(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::ExecutionFailed: return "execution_failed";
    case ExecStatus::Timeout: return "timeout";
  }
  return "execution_failed";
}

std::optional<ExecStatus> exec_status_from_name(std::string_view name) {
  if (name == "ok") return ExecStatus::Ok;
  if (name == "execution_failed") return ExecStatus::ExecutionFailed;
  if (name == "timeout") return ExecStatus::Timeout;
  return std::nullopt;
}

std::string_view terminal_status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Answered: return "answered";
    case TerminalStatus::MaxStepsReached: return "max_steps_reached";
    case TerminalStatus::EnvFailure: return "env_failure";
    case TerminalStatus::Blocked: return "blocked";
  }
  return "env_failure";
}

std::optional<TerminalStatus> terminal_status_from_name(std::string_view name) {
  if (name == "answered") return TerminalStatus::Answered;
  if (name == "max_steps_reached") return TerminalStatus::MaxStepsReached;
  if (name == "env_failure") return TerminalStatus::EnvFailure;
  if (name == "blocked") return TerminalStatus::Blocked;
  return std::nullopt;
}

}  // namespace webrl::core

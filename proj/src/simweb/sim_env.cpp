#include "webrl/simweb/sim_env.hpp"

#include <algorithm>

namespace webrl::simweb {

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

// Small integer mixer; the renderer only needs stable, well-spread bits.
std::uint32_t mix(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  std::uint32_t h = a * 0x9e3779b9u ^ (b + 0x7f4a7c15u) * 0x85ebca6bu ^
                    (c + 0x165667b1u) * 0xc2b2ae35u;
  h ^= h >> 15;
  h *= 0x2c1b3c6du;
  h ^= h >> 12;
  return h;
}

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb role_border(core::ElementRole role) {
  switch (role) {
    case core::ElementRole::Button: return {30, 60, 160};
    case core::ElementRole::Link: return {20, 120, 40};
    case core::ElementRole::Input: return {120, 40, 140};
    case core::ElementRole::Select: return {160, 90, 20};
    case core::ElementRole::Checkbox: return {150, 20, 60};
    case core::ElementRole::MenuItem: return {20, 130, 130};
    case core::ElementRole::Other: return {80, 80, 80};
  }
  return {80, 80, 80};
}

constexpr int kBannerRows = 12;

std::uint32_t field_token(const SimState& state, const SimElement& el) {
  const auto it = state.field_values.find(el.id);
  if (it == state.field_values.end()) return el.visual_token;
  return el.visual_token ^ fnv1a(it->second);
}

// Finds the topmost, most specific simulated element under a page-space point
// (same tie-break as core::hit_test: smallest area, then latest in list).
const SimElement* find_sim_element(const PageSpec& page, core::Point page_point) {
  const SimElement* best = nullptr;
  for (const SimElement& el : page.elements) {
    if (!el.element.bbox.contains(page_point)) continue;
    if (best == nullptr || el.element.bbox.area() <= best->element.bbox.area()) best = &el;
  }
  return best;
}

}  // namespace

core::Image render(const SimState& state, const SiteGraph& graph) {
  const PageSpec& page = graph.page(state.current_url);
  const int W = graph.viewport_width;
  const int H = graph.viewport_height;

  core::Image img;
  img.width = W;
  img.height = H;
  img.rgb.resize(std::size_t(W) * H * 3);

  // Background: 16px cells hashed in page space so scrolling shifts them.
  for (int y = 0; y < H; ++y) {
    const int py = y + state.scroll_offset;
    std::uint8_t* row = img.px(0, y);
    for (int x = 0; x < W; ++x) {
      const std::uint32_t v = mix(page.background_seed, std::uint32_t(x >> 4),
                                  std::uint32_t(py >> 4));
      row[3 * x] = std::uint8_t(228 + (v & 15));
      row[3 * x + 1] = std::uint8_t(228 + ((v >> 4) & 15));
      row[3 * x + 2] = std::uint8_t(228 + ((v >> 8) & 15));
    }
  }

  // Elements: bordered boxes with a token-driven fill, drawn in page space.
  for (const SimElement& el : page.elements) {
    const core::BBox& b = el.element.bbox;
    const std::uint32_t token = field_token(state, el);
    const Rgb border = role_border(el.element.role);
    const std::uint32_t name_tint = fnv1a(el.element.name);

    const int y0 = std::max(0, b.y - state.scroll_offset);
    const int y1 = std::min(H, b.y + b.height - state.scroll_offset);
    for (int y = y0; y < y1; ++y) {
      const int ly = y + state.scroll_offset - b.y;
      std::uint8_t* row = img.px(0, y);
      for (int x = b.x; x < b.x + b.width && x < W; ++x) {
        const int lx = x - b.x;
        const bool edge = lx < 2 || ly < 2 || lx >= b.width - 2 || ly >= b.height - 2;
        if (edge) {
          row[3 * x] = border.r;
          row[3 * x + 1] = border.g;
          row[3 * x + 2] = border.b;
        } else {
          const std::uint32_t v =
              mix(token ^ name_tint, std::uint32_t(lx >> 3), std::uint32_t(ly >> 3));
          row[3 * x] = std::uint8_t(140 + (v & 63));
          row[3 * x + 1] = std::uint8_t(140 + ((v >> 6) & 63));
          row[3 * x + 2] = std::uint8_t(140 + ((v >> 12) & 63));
        }
      }
    }
  }

  // URL banner overlay: a bit pattern of the current URL across the top rows.
  const std::uint32_t u = fnv1a(state.current_url);
  for (int y = 0; y < kBannerRows && y < H; ++y) {
    std::uint8_t* row = img.px(0, y);
    for (int x = 0; x < W; ++x) {
      const bool bit = (u >> ((x / 6) & 31)) & 1u;
      const std::uint8_t v = bit ? 52 : 208;
      row[3 * x] = v;
      row[3 * x + 1] = v;
      row[3 * x + 2] = std::uint8_t(bit ? 76 : 216);
    }
  }
  return img;
}

core::Observation observe(const SimState& state, const SiteGraph& graph,
                          std::int64_t captured_at) {
  const PageSpec& page = graph.page(state.current_url);
  core::Observation obs;
  obs.url = state.current_url;
  obs.captured_at = captured_at;
  obs.screenshot = render(state, graph);
  for (const SimElement& el : page.elements) {
    const int vy = el.element.bbox.y - state.scroll_offset;
    if (vy < 0 || vy + el.element.bbox.height > graph.viewport_height) continue;
    core::InteractableElement visible = el.element;
    visible.bbox.y = vy;
    obs.elements.push_back(std::move(visible));
  }
  return obs;
}

std::pair<SimState, core::Observation> reset(const SiteGraph& graph) {
  SimState state;
  state.current_url = graph.start_url;
  return {state, observe(state, graph)};
}

StepResult step(const SimState& state, const SiteGraph& graph, const core::Action& action) {
  StepResult out;
  out.state = state;
  out.status = core::ExecStatus::Ok;

  const PageSpec& page = graph.page(state.current_url);

  if (action.point && !core::bounded_by(action, graph.viewport_width, graph.viewport_height)) {
    // The protocol layer rejects coordinates outside the viewport.
    out.status = core::ExecStatus::ExecutionFailed;
    out.obs = observe(out.state, graph);
    return out;
  }

  auto hit_at = [&](core::Point p) {
    return find_sim_element(page, {p.x, p.y + state.scroll_offset});
  };
  auto apply_mutation = [&](const SimElement& el) {
    out.state.field_values[el.id] += "*";
  };
  auto goto_url = [&](const std::string& target) {
    out.state.history.push_back(out.state.current_url);
    out.state.current_url = target;
    out.state.scroll_offset = 0;
  };

  switch (action.kind) {
    case core::ActionKind::Click: {
      if (const SimElement* el = hit_at(*action.point); el && el->on_click) {
        if (el->on_click->kind == TransitionKind::GotoUrl) goto_url(el->on_click->target_url);
        else if (el->on_click->kind == TransitionKind::MutateInPlace) apply_mutation(*el);
      }
      break;
    }
    case core::ActionKind::Hover: {
      if (const SimElement* el = hit_at(*action.point);
          el && el->on_hover && el->on_hover->kind == TransitionKind::MutateInPlace) {
        apply_mutation(*el);
      }
      break;
    }
    case core::ActionKind::Type: {
      if (const SimElement* el = hit_at(*action.point); el && el->accepts_text) {
        out.state.field_values[el->id] = *action.text;
      }
      break;
    }
    case core::ActionKind::Navigate: {
      if (graph.pages.count(*action.url)) goto_url(*action.url);
      else out.status = core::ExecStatus::ExecutionFailed;
      break;
    }
    case core::ActionKind::GoBack: {
      if (!out.state.history.empty()) {
        out.state.current_url = out.state.history.back();
        out.state.history.pop_back();
        out.state.scroll_offset = 0;
      }
      break;
    }
    case core::ActionKind::Scroll: {
      const int cap = std::max(0, graph.page_content_height(page) - graph.viewport_height);
      out.state.scroll_offset =
          std::clamp(out.state.scroll_offset + *action.scroll_delta, 0, cap);
      break;
    }
    case core::ActionKind::Wait:
    case core::ActionKind::Answer:
      break;
  }

  out.obs = observe(out.state, graph);
  return out;
}

SimEnv::SimEnv(std::shared_ptr<const SiteGraph> graph) : graph_(std::move(graph)) {
  if (!graph_) throw core::EnvError("SimEnv: null site graph");
}

core::Observation SimEnv::reset(const std::string& start_url) {
  const std::string url = start_url.empty() ? graph_->start_url : start_url;
  if (!graph_->pages.count(url))
    throw core::EnvError("SimEnv: start URL " + url + " not in scenario");
  state_ = SimState{};
  state_.current_url = url;
  captures_ = 0;
  return simweb::observe(state_, *graph_, ++captures_);
}

core::ExecStatus SimEnv::execute(const core::Action& action) {
  StepResult r = simweb::step(state_, *graph_, action);
  state_ = std::move(r.state);
  return r.status;
}

core::Observation SimEnv::observe() {
  return simweb::observe(state_, *graph_, ++captures_);
}

}  // namespace webrl::simweb

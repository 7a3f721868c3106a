#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "webrl/core/env.hpp"
#include "webrl/simweb/scenario.hpp"

namespace webrl::simweb {

// Value state of one simulated browsing session. field_values doubles as the
// mutation ledger: typing replaces an element's entry, a MutateInPlace
// transition appends a mark, and the renderer folds the entry into the
// element's fill pattern either way.
struct SimState {
  std::string current_url;
  std::map<std::string, std::string> field_values;
  std::vector<std::string> history;  // for GoBack
  int scroll_offset = 0;

  bool operator==(const SimState&) const = default;
};

// Pure function of (state, graph): identical inputs give byte-identical
// images. Integer arithmetic only, so the bytes are stable across platforms.
core::Image render(const SimState& state, const SiteGraph& graph);

// Page state as seen through the viewport: URL, screenshot, and the elements
// fully visible after scrolling (bboxes in viewport space).
core::Observation observe(const SimState& state, const SiteGraph& graph,
                          std::int64_t captured_at = 0);

std::pair<SimState, core::Observation> reset(const SiteGraph& graph);

struct StepResult {
  SimState state;
  core::Observation obs;
  core::ExecStatus status = core::ExecStatus::Ok;
};

// Applies one action. Failures (unknown navigation target, out-of-viewport
// coordinates) come back as ExecutionFailed with the state unchanged; an
// action that hits nothing is Ok and leaves the screenshot byte-identical.
StepResult step(const SimState& state, const SiteGraph& graph, const core::Action& action);

// Environment adapter owning session state and the logical capture counter.
class SimEnv : public core::Environment {
 public:
  explicit SimEnv(std::shared_ptr<const SiteGraph> graph);

  core::Observation reset(const std::string& start_url) override;
  core::ExecStatus execute(const core::Action& action) override;
  core::Observation observe() override;

  int viewport_width() const override { return graph_->viewport_width; }
  int viewport_height() const override { return graph_->viewport_height; }

  const SimState& state() const { return state_; }

 private:
  std::shared_ptr<const SiteGraph> graph_;
  SimState state_;
  std::int64_t captures_ = 0;
};

}  // namespace webrl::simweb

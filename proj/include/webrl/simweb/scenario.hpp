#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webrl/core/error.hpp"
#include "webrl/core/types.hpp"

namespace webrl::simweb {

// Declarative page graph for the in-process simulated website. URLs use the
// sim:// scheme so a scenario can never be pointed at a live browser by
// accident. The JSON schema is documented in docs/formats.md.

enum class TransitionKind { GotoUrl, MutateInPlace, NoOp };

struct Transition {
  TransitionKind kind = TransitionKind::NoOp;
  std::string target_url;  // GotoUrl only
};

struct SimElement {
  std::string id;  // globally unique; keys field state
  core::InteractableElement element;  // bbox in page coordinates
  std::optional<Transition> on_click;
  std::optional<Transition> on_hover;  // MutateInPlace or NoOp only
  bool accepts_text = false;           // Type stores the typed value
  std::uint32_t visual_token = 0;      // drives the rendered fill pattern
};

struct PageSpec {
  std::string url;
  std::vector<SimElement> elements;
  std::uint32_t background_seed = 0;
  int content_height = 0;  // 0 = exactly one viewport tall
};

struct SiteGraph {
  std::string start_url;
  std::map<std::string, PageSpec> pages;
  int viewport_width = 1280;
  int viewport_height = 800;

  const PageSpec& page(const std::string& url) const;
  int page_content_height(const PageSpec& p) const {
    return p.content_height > 0 ? p.content_height : viewport_height;
  }
};

enum class ScenarioErrorKind { Parse, DanglingTransition, MissingStart };

class ScenarioError : public Error {
 public:
  ScenarioError(ScenarioErrorKind kind, const std::string& what)
      : Error(what), kind(kind) {}
  ScenarioErrorKind kind;
};

// Parses and fully validates a scenario document: the start URL and every
// transition target must resolve, element ids must be unique, and bboxes must
// lie within the page (viewport width x content height).
SiteGraph parse_scenario(const nlohmann::json& doc);
SiteGraph load_scenario(const std::filesystem::path& path);

}  // namespace webrl::simweb

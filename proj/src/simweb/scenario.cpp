#include "webrl/simweb/scenario.hpp"

#include <fstream>
#include <set>

namespace webrl::simweb {

using nlohmann::json;

const PageSpec& SiteGraph::page(const std::string& url) const {
  const auto it = pages.find(url);
  if (it == pages.end()) throw Error("simweb: no page " + url);
  return it->second;
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw ScenarioError(ScenarioErrorKind::Parse, "scenario: " + what);
}

Transition parse_transition(const json& j, const std::string& where, bool allow_goto) {
  if (!j.is_object()) parse_fail(where + ": transition must be an object");
  Transition t;
  if (j.contains("goto")) {
    if (!allow_goto) parse_fail(where + ": hover may only mutate");
    if (!j["goto"].is_string()) parse_fail(where + ": \"goto\" must be a URL string");
    t.kind = TransitionKind::GotoUrl;
    t.target_url = j["goto"].get<std::string>();
  } else if (j.value("mutate", false)) {
    t.kind = TransitionKind::MutateInPlace;
  } else {
    t.kind = TransitionKind::NoOp;
  }
  return t;
}

SimElement parse_element(const json& j, const std::string& page_url, std::size_t idx,
                         std::size_t page_idx) {
  const std::string where = page_url + " element " + std::to_string(idx);
  if (!j.is_object()) parse_fail(where + ": must be an object");

  SimElement el;
  el.id = j.value("id", "p" + std::to_string(page_idx) + "_e" + std::to_string(idx));
  if (el.id.empty()) parse_fail(where + ": empty id");

  const std::string role = j.value("role", "other");
  const auto parsed_role = core::element_role_from_name(role);
  if (!parsed_role) parse_fail(where + ": unknown role \"" + role + "\"");
  el.element.role = *parsed_role;
  el.element.name = j.value("name", "");

  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4)
    parse_fail(where + ": \"bbox\" must be [x, y, w, h]");
  el.element.bbox = {j["bbox"][0].get<int>(), j["bbox"][1].get<int>(),
                     j["bbox"][2].get<int>(), j["bbox"][3].get<int>()};

  if (j.contains("on_click")) el.on_click = parse_transition(j["on_click"], where, true);
  if (j.contains("on_hover")) el.on_hover = parse_transition(j["on_hover"], where, false);
  el.accepts_text = j.value("accepts_text", el.element.role == core::ElementRole::Input);
  el.visual_token = j.value("visual_token", std::uint32_t(idx + 1));
  return el;
}

}  // namespace

SiteGraph parse_scenario(const json& doc) {
  if (!doc.is_object()) parse_fail("document must be an object");

  SiteGraph graph;
  if (doc.contains("viewport")) {
    const json& vp = doc["viewport"];
    if (!vp.is_object() || !vp.contains("width") || !vp.contains("height"))
      parse_fail("\"viewport\" must carry width and height");
    graph.viewport_width = vp["width"].get<int>();
    graph.viewport_height = vp["height"].get<int>();
  }
  if (graph.viewport_width <= 0 || graph.viewport_height <= 0)
    parse_fail("viewport dimensions must be positive");

  if (!doc.contains("start_url") || !doc["start_url"].is_string())
    parse_fail("missing \"start_url\"");
  graph.start_url = doc["start_url"].get<std::string>();

  if (!doc.contains("pages") || !doc["pages"].is_array() || doc["pages"].empty())
    parse_fail("\"pages\" must be a non-empty array");

  std::set<std::string> ids;
  std::size_t page_idx = 0;
  for (const json& pj : doc["pages"]) {
    if (!pj.is_object() || !pj.contains("url") || !pj["url"].is_string())
      parse_fail("every page needs a \"url\"");
    PageSpec page;
    page.url = pj["url"].get<std::string>();
    if (page.url.rfind("sim://", 0) != 0)
      parse_fail("page URL \"" + page.url + "\" must use the sim:// scheme");
    if (graph.pages.count(page.url)) parse_fail("duplicate page URL " + page.url);
    page.background_seed = pj.value("background_seed", std::uint32_t(page_idx * 7919 + 1));
    page.content_height = pj.value("content_height", 0);
    if (page.content_height != 0 && page.content_height < graph.viewport_height)
      parse_fail(page.url + ": content_height below the viewport height");

    if (pj.contains("elements")) {
      if (!pj["elements"].is_array()) parse_fail(page.url + ": \"elements\" must be an array");
      std::size_t idx = 0;
      for (const json& ej : pj["elements"]) {
        SimElement el = parse_element(ej, page.url, idx++, page_idx);
        if (!ids.insert(el.id).second) parse_fail("duplicate element id \"" + el.id + "\"");
        const core::BBox& b = el.element.bbox;
        const int page_h = graph.page_content_height(page);
        if (b.width <= 0 || b.height <= 0 || b.x < 0 || b.y < 0 ||
            b.x + b.width > graph.viewport_width || b.y + b.height > page_h) {
          parse_fail(page.url + ": element \"" + el.id + "\" bbox outside the page");
        }
        page.elements.push_back(std::move(el));
      }
    }
    graph.pages.emplace(page.url, std::move(page));
    ++page_idx;
  }

  if (!graph.pages.count(graph.start_url))
    throw ScenarioError(ScenarioErrorKind::MissingStart,
                        "scenario: start_url " + graph.start_url + " is not a declared page");

  for (const auto& [url, page] : graph.pages) {
    for (const SimElement& el : page.elements) {
      if (el.on_click && el.on_click->kind == TransitionKind::GotoUrl &&
          !graph.pages.count(el.on_click->target_url)) {
        throw ScenarioError(ScenarioErrorKind::DanglingTransition,
                            "scenario: " + url + " element \"" + el.id +
                                "\" targets undeclared URL " + el.on_click->target_url);
      }
    }
  }
  return graph;
}

SiteGraph load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) parse_fail("invalid JSON in " + path.string());
  return parse_scenario(doc);
}

}  // namespace webrl::simweb

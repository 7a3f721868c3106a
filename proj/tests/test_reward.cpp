#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "webrl/reward/reward.hpp"
#include "webrl/reward/ssim.hpp"

using namespace webrl;
using core::Image;

namespace {

Image pattern_image(int w, int h, std::uint32_t seed) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(std::size_t(w) * h * 3);
  std::uint32_t s = seed * 2654435761u + 1u;
  for (auto& b : img.rgb) {
    s ^= s << 13;
    s ^= s >> 17;
    s ^= s << 5;
    b = std::uint8_t(s & 0xff);
  }
  return img;
}

Image checkerboard(int w, int h, int cell) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(std::size_t(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v = ((x / cell + y / cell) % 2) ? 255 : 0;
      std::uint8_t* p = img.px(x, y);
      p[0] = p[1] = p[2] = v;
    }
  }
  return img;
}

Image inverted(const Image& src) {
  Image out = src;
  for (auto& b : out.rgb) b = std::uint8_t(255 - b);
  return out;
}

// Independent reference: plain double loops over the same pinned convention
// (BT.601 luma, 8x8 windows at stride 8, C1/C2 for 8-bit range). No shortcuts,
// no Eigen, kept apart from the implementation on purpose.
double ssim_reference(const Image& a, const Image& b) {
  REQUIRE(a.width == b.width);
  REQUIRE(a.height == b.height);
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  auto luma = [](const Image& img, int x, int y) {
    const std::uint8_t* p = img.px(x, y);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  const int win = 8;
  const int wx = a.width >= win ? a.width / win : 1;
  const int wy = a.height >= win ? a.height / win : 1;
  const int cw = a.width >= win ? win : a.width;
  const int ch = a.height >= win ? win : a.height;
  double total = 0.0;
  int windows = 0;
  for (int by = 0; by < wy; ++by) {
    for (int bx = 0; bx < wx; ++bx) {
      double sum_a = 0, sum_b = 0;
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
          sum_a += luma(a, bx * win + x, by * win + y);
          sum_b += luma(b, bx * win + x, by * win + y);
        }
      const double n = double(cw) * ch;
      const double mu_a = sum_a / n, mu_b = sum_b / n;
      double var_a = 0, var_b = 0, cov = 0;
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
          const double da = luma(a, bx * win + x, by * win + y) - mu_a;
          const double db = luma(b, bx * win + x, by * win + y) - mu_b;
          var_a += da * da;
          var_b += db * db;
          cov += da * db;
        }
      var_a /= n;
      var_b /= n;
      cov /= n;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++windows;
    }
  }
  return total / windows;
}

core::Observation make_obs(const std::string& url, const Image& shot,
                           std::vector<core::InteractableElement> elements = {}) {
  core::Observation obs;
  obs.url = url;
  obs.screenshot = shot;
  obs.elements = std::move(elements);
  return obs;
}

}  // namespace

TEST_CASE("ssim: identity is exactly 1.0") {
  const Image img = pattern_image(64, 48, 3);
  CHECK(reward::ssim(img, img) == 1.0);
  Image copy = img;
  CHECK(reward::ssim(img, copy) == 1.0);
}

TEST_CASE("ssim: dimension mismatch") {
  CHECK_THROWS_AS(reward::ssim(pattern_image(64, 48, 1), pattern_image(48, 64, 1)),
                  reward::DimensionMismatch);
}

TEST_CASE("ssim: symmetry within 1e-12") {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Image a = pattern_image(80, 64, rng());
    const Image b = pattern_image(80, 64, rng());
    CHECK(std::abs(reward::ssim(a, b) - reward::ssim(b, a)) < 1e-12);
  }
}

TEST_CASE("ssim: checkerboard vs inversion is far from 1") {
  const Image board = checkerboard(64, 64, 8);
  CHECK(reward::ssim(board, inverted(board)) < 0.5);
}

TEST_CASE("ssim: matches the independent reference") {
  const Image a = pattern_image(72, 56, 11);
  const Image b = pattern_image(72, 56, 12);
  CHECK(reward::ssim(a, b) == doctest::Approx(ssim_reference(a, b)).epsilon(1e-6));
  const Image board = checkerboard(64, 64, 8);
  CHECK(reward::ssim(board, inverted(board)) ==
        doctest::Approx(ssim_reference(board, inverted(board))).epsilon(1e-6));
  // Images smaller than one window fall back to a single global window.
  const Image tiny_a = pattern_image(5, 5, 1), tiny_b = pattern_image(5, 5, 2);
  CHECK(reward::ssim(tiny_a, tiny_b) ==
        doctest::Approx(ssim_reference(tiny_a, tiny_b)).epsilon(1e-6));
}

// ---------------------------------------------------------------------------
// Rule cascade
// ---------------------------------------------------------------------------

TEST_CASE("rdt_evaluate: branch order and rewards") {
  reward::RewardConfig cfg;
  cfg.validate();
  const Image shot = pattern_image(32, 32, 1);
  const Image other = pattern_image(32, 32, 2);
  int judge_calls = 0;
  bool judge_verdict = false;
  const reward::ProgressJudge judge = [&](const std::string&, const Image&, const Image&) {
    ++judge_calls;
    return judge_verdict;
  };

  core::Step step;
  step.action = core::Action::click(5, 5);
  step.obs_before = make_obs("sim://a", shot);
  step.obs_after = make_obs("sim://a", shot);

  SUBCASE("1: execution failure") {
    step.exec_status = core::ExecStatus::ExecutionFailed;
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::ExecutionFailed);
    CHECK(r.reward == -0.001);
    CHECK(judge_calls == 0);
  }
  SUBCASE("1: timeout counts as execution failure") {
    step.exec_status = core::ExecStatus::Timeout;
    CHECK(reward::rdt_evaluate(step, "q", cfg, judge).branch ==
          reward::RdtBranch::ExecutionFailed);
  }
  SUBCASE("2: url change wins over everything after it") {
    step.obs_after = make_obs("sim://b", other);
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::UrlChanged);
    CHECK(r.reward == 0.0);
    CHECK(judge_calls == 0);
  }
  SUBCASE("3: interactable hit on the pre-action observation") {
    step.obs_before.elements = {{core::ElementRole::Button, "go", {0, 0, 10, 10}}};
    step.obs_after = make_obs("sim://a", other);  // visuals changed, URL same
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::InteractableHit);
    CHECK(r.reward == 0.0);
    CHECK(judge_calls == 0);
  }
  SUBCASE("3 does not fire for non-interactable roles") {
    step.obs_before.elements = {{core::ElementRole::Other, "decor", {0, 0, 10, 10}}};
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::NoVisualChange);  // identical screenshots
    CHECK(r.reward == -0.001);
  }
  SUBCASE("3 covers Type on an input element") {
    step.action = core::Action::type_text(5, 5, "hello");
    step.obs_before.elements = {{core::ElementRole::Input, "field", {0, 0, 10, 10}}};
    step.obs_after = make_obs("sim://a", other);
    CHECK(reward::rdt_evaluate(step, "q", cfg, judge).branch ==
          reward::RdtBranch::InteractableHit);
  }
  SUBCASE("3 is skipped for scroll, which falls through to SSIM/judge") {
    step.action = core::Action::scroll(200);
    step.obs_before.elements = {{core::ElementRole::Button, "go", {0, 0, 32, 32}}};
    step.obs_after = make_obs("sim://a", other);
    judge_verdict = true;
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::JudgedProgress);
    CHECK(judge_calls == 1);
  }
  SUBCASE("4: redundant action on identical frames") {
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::NoVisualChange);
    CHECK(r.reward == -0.001);
    CHECK(judge_calls == 0);  // judge economy: branches 1-4 short-circuit
  }
  SUBCASE("5: judged progress") {
    step.obs_after = make_obs("sim://a", other);
    judge_verdict = true;
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::JudgedProgress);
    CHECK(r.reward == 0.0);
    CHECK(judge_calls == 1);
  }
  SUBCASE("6: irrelevant change") {
    step.obs_after = make_obs("sim://a", other);
    judge_verdict = false;
    const auto r = reward::rdt_evaluate(step, "q", cfg, judge);
    CHECK(r.branch == reward::RdtBranch::IrrelevantChange);
    CHECK(r.reward == -0.001);
    CHECK(judge_calls == 1);
  }
}

TEST_CASE("format_reward: linear in the number of violations") {
  reward::RewardConfig cfg;
  core::Trajectory traj;
  traj.steps.resize(4);
  CHECK(reward::format_reward(traj, cfg) == 0.0);
  traj.steps[1].format_violation = true;
  traj.steps[3].format_violation = true;
  CHECK(reward::format_reward(traj, cfg) == doctest::Approx(-0.5).epsilon(1e-12));
  for (auto& s : traj.steps) s.format_violation = true;
  CHECK(reward::format_reward(traj, cfg) == doctest::Approx(4 * -0.25).epsilon(1e-12));
}

TEST_CASE("outcome_reward: formula, discard, and range errors") {
  reward::RewardConfig cfg;
  CHECK(!reward::outcome_reward({-1, 3, 3}, cfg).has_value());
  CHECK(*reward::outcome_reward({5, 5, 5}, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*reward::outcome_reward({5, 1, 1}, cfg) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(*reward::outcome_reward({0, 1, 1}, cfg) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(reward::outcome_reward({6, 3, 3}, cfg), reward::RangeError);
  CHECK_THROWS_AS(reward::outcome_reward({3, 0, 3}, cfg), reward::RangeError);
  CHECK_THROWS_AS(reward::outcome_reward({3, 3, 9}, cfg), reward::RangeError);
}

TEST_CASE("hybrid_reward: totals and the discard rule") {
  reward::RewardConfig cfg;
  const reward::ProgressJudge no_judge = [](const std::string&, const Image&, const Image&) {
    FAIL("progress judge must not run for these steps");
    return false;
  };

  core::Trajectory traj;
  traj.task.query = "q";
  const Image a = pattern_image(16, 16, 1);
  // Three penalized steps (execution failures keep the cascade in branch 1).
  for (int i = 0; i < 3; ++i) {
    core::Step s;
    s.index = i;
    s.exec_status = core::ExecStatus::ExecutionFailed;
    s.obs_before = make_obs("sim://a", a);
    s.obs_after = make_obs("sim://a", a);
    traj.steps.push_back(s);
  }

  SUBCASE("perfect outcome with 3 penalized steps") {
    const auto b = reward::hybrid_reward(traj, {5, 5, 5}, cfg, no_judge);
    REQUIRE(b.total.has_value());
    CHECK(*b.total == doctest::Approx(1.0 - 0.003).epsilon(1e-12));
    CHECK(!b.invalid);
  }
  SUBCASE("perfect run scores exactly 1") {
    core::Trajectory clean;
    clean.task.query = "q";
    core::Step s;
    s.obs_before = make_obs("sim://a", a);
    s.obs_after = make_obs("sim://b", pattern_image(16, 16, 2));
    clean.steps.push_back(s);
    const auto b = reward::hybrid_reward(clean, {5, 5, 5}, cfg, no_judge);
    REQUIRE(b.total.has_value());
    CHECK(*b.total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("task_completion = -1 discards regardless of step rewards") {
    const auto b = reward::hybrid_reward(traj, {-1, 5, 5}, cfg, no_judge);
    CHECK(b.invalid);
    CHECK(!b.total.has_value());
  }
  SUBCASE("format penalty joins the total") {
    traj.steps[0].format_violation = true;
    const auto b = reward::hybrid_reward(traj, {5, 5, 5}, cfg, no_judge);
    REQUIRE(b.total.has_value());
    CHECK(*b.total == doctest::Approx(1.0 - 0.003 - 0.25).epsilon(1e-12));
  }
}

TEST_CASE("reward config validation") {
  reward::RewardConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.step_penalty = 0.0;
  CHECK_THROWS_AS(cfg.validate(), reward::RangeError);
  cfg = {};
  cfg.w_tc = 0.9;
  CHECK_THROWS_AS(cfg.validate(), reward::RangeError);
  cfg = {};
  cfg.format_penalty = 0.1;
  CHECK_THROWS_AS(cfg.validate(), reward::RangeError);
}

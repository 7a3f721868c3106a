#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "webrl/policy/math.hpp"

using namespace webrl;
using policy::GroupRewards;
using policy::TokenRecord;
using policy::WeightConfig;
using policy::WeightedBatch;
using policy::WeightedSample;

namespace {

// Independent oracle: straight closed-form evaluation in 80-bit long double,
// beta^n via powl rather than the log1p/expm1 route the implementation uses.
std::vector<long double> effective_weights_oracle(const std::vector<std::int64_t>& counts,
                                                  double k) {
  const long double beta = 1.0L - std::pow(10.0L, (long double)(-k));
  std::vector<long double> inv;
  long double sum = 0.0L;
  for (std::int64_t n : counts) {
    const long double effective = (1.0L - std::pow(beta, (long double)n)) / (1.0L - beta);
    inv.push_back(1.0L / effective);
    sum += inv.back();
  }
  for (long double& v : inv) v = (long double)counts.size() * v / sum;
  return inv;
}

// Brute-force double loop over Eq-4 style weighted batch loss.
double sft_loss_oracle(const WeightedBatch& batch) {
  double total = 0.0;
  for (const WeightedSample& s : batch.samples) {
    double token_sum = 0.0;
    for (Eigen::Index t = 0; t < s.token_losses.size(); ++t) token_sum += s.token_losses[t];
    total += batch.weights[s.dataset_index - 1] * (token_sum / double(s.token_losses.size()));
  }
  return total / double(batch.samples.size());
}

}  // namespace

TEST_CASE("effective_weights: equal counts give exactly 1") {
  const auto w = policy::effective_weights({2.0, {100, 100, 100}});
  REQUIRE(w.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("effective_weights: frozen two-dataset case (k=2)") {
  // counts [10, 1000], beta = 0.99: E = [9.56179..., 99.99568...].
  const auto w = policy::effective_weights({2.0, {10, 1000}});
  CHECK(w[0] == doctest::Approx(1.82544).epsilon(1e-4));
  CHECK(w[1] == doctest::Approx(0.17456).epsilon(1e-4));
  const auto oracle = effective_weights_oracle({10, 1000}, 2.0);
  CHECK(w[0] == doctest::Approx(double(oracle[0])).epsilon(1e-10));
  CHECK(w[1] == doctest::Approx(double(oracle[1])).epsilon(1e-10));
}

TEST_CASE("effective_weights: k -> 0 limit is uniform") {
  const auto w = policy::effective_weights({1e-9, {3, 50000, 1234}});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(w[i] - 1.0) < 1e-6);
}

TEST_CASE("effective_weights: k = 12 approaches inverse frequency") {
  const std::vector<std::int64_t> counts = {10, 100, 1000, 5000};
  const auto w = policy::effective_weights({12.0, counts});
  double inv_sum = 0.0;
  for (auto n : counts) inv_sum += 1.0 / double(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expect = double(counts.size()) * (1.0 / double(counts[i])) / inv_sum;
    CHECK(std::abs(w[Eigen::Index(i)] - expect) < 1e-6);
  }
}

TEST_CASE("effective_weights: randomized sum and monotonicity against the oracle") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> logk(std::log(0.3), std::log(12.0));
  for (int trial = 0; trial < 200; ++trial) {
    const double k = std::exp(logk(rng));
    // Counts chosen so beta^n stays representable and strict monotonicity is
    // meaningful in double precision.
    const double log_beta = std::log1p(-std::pow(10.0, -k));
    const std::int64_t cap = std::min<std::int64_t>(
        10'000'000, std::max<std::int64_t>(10, std::int64_t(20.0 / std::max(-log_beta, 2e-6))));
    std::uniform_int_distribution<std::int64_t> count_d(1, cap);
    std::uniform_int_distribution<int> c_d(2, 8);
    std::vector<std::int64_t> counts;
    const int C = c_d(rng);
    for (int i = 0; i < C; ++i) counts.push_back(count_d(rng));

    const auto w = policy::effective_weights({k, counts});
    CHECK(std::abs(w.sum() - double(C)) < 1e-9);

    const auto oracle = effective_weights_oracle(counts, k);
    for (int i = 0; i < C; ++i)
      CHECK(w[i] == doctest::Approx(double(oracle[std::size_t(i)])).epsilon(1e-9));

    for (int i = 0; i < C; ++i) {
      for (int j = 0; j < C; ++j) {
        if (counts[std::size_t(i)] < counts[std::size_t(j)]) CHECK(w[i] > w[j]);
      }
    }
  }
}

TEST_CASE("effective_weights: domain errors") {
  CHECK_THROWS_AS(policy::effective_weights({0.0, {1, 2}}), DomainError);
  CHECK_THROWS_AS(policy::effective_weights({-1.0, {1, 2}}), DomainError);
  CHECK_THROWS_AS(policy::effective_weights({1.0, {1, 0}}), DomainError);
  CHECK_THROWS_AS(policy::effective_weights({1.0, {}}), DomainError);
}

TEST_CASE("weighted_sft_loss: plain mean when B=1, alpha=1") {
  WeightedBatch batch;
  batch.weights = Eigen::ArrayXd::Ones(1);
  batch.samples.push_back({1, (Eigen::ArrayXd(2) << 2.0, 4.0).finished()});
  CHECK(policy::weighted_sft_loss(batch) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("weighted_sft_loss: frozen two-sample case") {
  WeightedBatch batch;
  batch.weights = (Eigen::ArrayXd(2) << 1.5, 0.5).finished();
  batch.samples.push_back({1, (Eigen::ArrayXd(2) << 1.0, 1.0).finished()});
  batch.samples.push_back({2, (Eigen::ArrayXd(3) << 3.0, 3.0, 3.0).finished()});
  // (1.5*1 + 0.5*3) / 2 = 1.5
  CHECK(policy::weighted_sft_loss(batch) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("weighted_sft_loss: unit weights reduce to the mean of sample means") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> loss_d(0.0, 8.0);
  WeightedBatch batch;
  batch.weights = Eigen::ArrayXd::Ones(3);
  double mean_of_means = 0.0;
  for (int m = 0; m < 6; ++m) {
    Eigen::ArrayXd losses(4);
    for (int t = 0; t < 4; ++t) losses[t] = loss_d(rng);
    mean_of_means += losses.mean();
    batch.samples.push_back({1 + m % 3, losses});
  }
  mean_of_means /= 6.0;
  CHECK(policy::weighted_sft_loss(batch) == doctest::Approx(mean_of_means).epsilon(1e-12));
}

TEST_CASE("weighted_sft_loss: oracle equivalence on randomized batches") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> loss_d(0.0, 4.0), w_d(0.1, 3.0);
  std::uniform_int_distribution<int> b_d(1, 12), t_d(1, 20), c_d(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    WeightedBatch batch;
    const int C = c_d(rng);
    batch.weights = Eigen::ArrayXd(C);
    for (int i = 0; i < C; ++i) batch.weights[i] = w_d(rng);
    const int B = b_d(rng);
    for (int m = 0; m < B; ++m) {
      Eigen::ArrayXd losses(t_d(rng));
      for (Eigen::Index t = 0; t < losses.size(); ++t) losses[t] = loss_d(rng);
      batch.samples.push_back({1 + int(rng() % std::uint32_t(C)), losses});
    }
    CHECK(policy::weighted_sft_loss(batch) ==
          doctest::Approx(sft_loss_oracle(batch)).epsilon(1e-12));
  }
}

TEST_CASE("weighted_sft_loss: index errors") {
  WeightedBatch batch;
  batch.weights = Eigen::ArrayXd::Ones(2);
  batch.samples.push_back({3, Eigen::ArrayXd::Ones(1)});
  CHECK_THROWS_AS(policy::weighted_sft_loss(batch), IndexError);
  batch.samples[0].dataset_index = 0;
  CHECK_THROWS_AS(policy::weighted_sft_loss(batch), IndexError);
}

TEST_CASE("group_advantages: degenerate and frozen cases") {
  const auto zeros = policy::group_advantages({Eigen::ArrayXd::Ones(3), 3}, 1e-6);
  for (int i = 0; i < 3; ++i) CHECK(zeros[i] == 0.0);

  const auto adv =
      policy::group_advantages({(Eigen::ArrayXd(5) << 1, 0, 1, 0, 1).finished(), 5}, 0.0);
  CHECK(adv[0] == doctest::Approx(0.8165).epsilon(1e-3));
  CHECK(adv[1] == doctest::Approx(-1.2247).epsilon(1e-3));
  CHECK(adv[2] == doctest::Approx(0.8165).epsilon(1e-3));
  CHECK(std::abs(adv.sum()) < 1e-9);
}

TEST_CASE("group_advantages: invariances") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> r_d(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::ArrayXd rewards(5);
    for (int i = 0; i < 5; ++i) rewards[i] = r_d(rng);
    const auto adv = policy::group_advantages({rewards, 5}, 0.0);
    CHECK(std::abs(adv.sum()) < 1e-9);
    const auto shifted = policy::group_advantages({rewards + 3.25, 5}, 0.0);
    const auto scaled = policy::group_advantages({rewards * 2.5, 5}, 0.0);
    for (int i = 0; i < 5; ++i) {
      CHECK(adv[i] == doctest::Approx(shifted[i]).epsilon(1e-9));
      CHECK(adv[i] == doctest::Approx(scaled[i]).epsilon(1e-9));
    }
  }
}

namespace {

std::vector<std::size_t> klcov_oracle_mask(const std::vector<TokenRecord>& tokens,
                                           double fraction) {
  const std::size_t n = tokens.size();
  double mean_adv = 0.0, mean_lp = 0.0;
  for (const TokenRecord& t : tokens) {
    mean_adv += t.advantage;
    mean_lp += t.logprob;
  }
  mean_adv /= double(n);
  mean_lp /= double(n);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < n; ++i) {
    scored.emplace_back((tokens[i].advantage - mean_adv) * (tokens[i].logprob - mean_lp), i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t keep = std::size_t(std::ceil(fraction * double(n)));
  std::vector<std::size_t> mask(scored.size() ? keep : 0);
  for (std::size_t i = 0; i < keep; ++i) mask[i] = scored[i].second;
  std::sort(mask.begin(), mask.end());
  return mask;
}

}  // namespace

TEST_CASE("klcov_select: exact mask size and tie-breaks") {
  std::vector<TokenRecord> tokens(10);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tokens[i] = {-1.0 - double(i) * 0.1, -1.0, 0.5};  // equal advantages -> all scores 0
  }
  const auto sel = policy::klcov_select(tokens, 0.2);
  REQUIRE(sel.mask.size() == 10);
  int selected = 0;
  for (bool b : sel.mask) selected += b ? 1 : 0;
  CHECK(selected == 2);
  CHECK(sel.mask[0]);  // ties resolved toward the lower index
  CHECK(sel.mask[1]);
  CHECK(sel.kl_terms[0] == doctest::Approx(-1.0 - (-1.0)).epsilon(1e-12));
  CHECK(sel.kl_terms[2] == 0.0);
}

TEST_CASE("klcov_select: oracle equivalence on randomized token sets") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> lp_d(-6.0, -0.01), adv_d(-2.0, 2.0);
  std::uniform_int_distribution<int> n_d(1, 80);
  std::uniform_real_distribution<double> frac_d(0.01, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = n_d(rng);
    std::vector<TokenRecord> tokens(static_cast<std::size_t>(n));
    for (auto& t : tokens) t = {lp_d(rng), lp_d(rng), adv_d(rng)};
    const double fraction = frac_d(rng);
    const auto sel = policy::klcov_select(tokens, fraction);
    const auto want = klcov_oracle_mask(tokens, fraction);
    std::vector<std::size_t> got;
    for (std::size_t i = 0; i < sel.mask.size(); ++i)
      if (sel.mask[i]) got.push_back(i);
    CHECK(got == want);
    CHECK(got.size() == std::size_t(std::ceil(fraction * double(n))));
  }
}

TEST_CASE("klcov_select: mask invariant under constant shifts") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> lp_d(-5.0, -0.1), adv_d(-1.0, 1.0);
  std::vector<TokenRecord> tokens(40);
  for (auto& t : tokens) t = {lp_d(rng), lp_d(rng), adv_d(rng)};
  auto shifted = tokens;
  for (auto& t : shifted) {
    t.advantage += 2.0;
    t.logprob += 0.75;
  }
  CHECK(policy::klcov_select(tokens, 0.25).mask == policy::klcov_select(shifted, 0.25).mask);
}

TEST_CASE("pass_at_k: closed form") {
  CHECK(policy::pass_at_k(5, 5, 1) == doctest::Approx(1.0));
  CHECK(policy::pass_at_k(5, 5, 3) == doctest::Approx(1.0));
  CHECK(policy::pass_at_k(5, 0, 2) == doctest::Approx(0.0));
  CHECK(policy::pass_at_k(5, 1, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(policy::pass_at_k(5, 1, 5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(policy::pass_at_k(5, 6, 1), DomainError);
  CHECK_THROWS_AS(policy::pass_at_k(5, 2, 0), DomainError);
  CHECK_THROWS_AS(policy::pass_at_k(5, 2, 6), DomainError);
  CHECK_THROWS_AS(policy::pass_at_k(0, 0, 1), DomainError);
}

TEST_CASE("pass_at_k: monotone in k and in c") {
  for (int G = 1; G <= 10; ++G) {
    for (int c = 0; c <= G; ++c) {
      for (int k = 1; k < G; ++k) {
        CHECK(policy::pass_at_k(G, c, k + 1) >= policy::pass_at_k(G, c, k));
      }
      if (c < G)
        for (int k = 1; k <= G; ++k)
          CHECK(policy::pass_at_k(G, c + 1, k) >= policy::pass_at_k(G, c, k));
    }
    for (int c = 1; c <= G; ++c) CHECK(policy::pass_at_k(G, c, G) == doctest::Approx(1.0));
    CHECK(policy::pass_at_k(G, 0, G) == doctest::Approx(0.0));
  }
}

TEST_CASE("pass_at_k: Monte Carlo cross-check") {
  std::mt19937 rng(4242);
  const int draws = 20000;
  for (const auto& [G, c, k] : std::vector<std::tuple<int, int, int>>{
           {5, 1, 1}, {5, 2, 3}, {8, 3, 2}, {10, 4, 7}}) {
    int hits = 0;
    std::vector<int> idx(static_cast<std::size_t>(G));
    std::iota(idx.begin(), idx.end(), 0);
    for (int d = 0; d < draws; ++d) {
      std::shuffle(idx.begin(), idx.end(), rng);
      bool ok = false;
      for (int i = 0; i < k; ++i) ok = ok || idx[std::size_t(i)] < c;
      hits += ok ? 1 : 0;
    }
    CHECK(std::abs(double(hits) / draws - policy::pass_at_k(G, c, k)) < 0.02);
  }
}

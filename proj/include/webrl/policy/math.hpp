#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "webrl/core/error.hpp"

namespace webrl::policy {

// Pure numerical kernels consumed by the rollout/reward pipeline and exported
// to an external trainer. Everything here is a function of its arguments.

// ---------------------------------------------------------------------------
// Effective-number dataset weights
// ---------------------------------------------------------------------------

struct WeightConfig {
  double k = 1.0;                      // scaling factor; beta = 1 - 10^-k
  std::vector<std::int64_t> counts;    // n_1..n_C, all >= 1
};

// alpha_i = C * E_i^-1 / sum_j E_j^-1 with E_i = (1 - beta^n_i) / (1 - beta).
// The weights sum to C. Throws DomainError on k <= 0, empty counts, or any
// n_i < 1 (E_i = 0 would make alpha undefined).
Eigen::ArrayXd effective_weights(const WeightConfig& cfg);

// ---------------------------------------------------------------------------
// Weighted multi-task SFT loss
// ---------------------------------------------------------------------------

struct WeightedSample {
  int dataset_index = 1;          // 1-based into weights
  Eigen::ArrayXd token_losses;    // length T_m >= 1
};

struct WeightedBatch {
  std::vector<WeightedSample> samples;  // batch size B
  Eigen::ArrayXd weights;               // alpha_1..alpha_C
};

// (1/B) * sum_m alpha_dataset(m) * mean_t(token_losses[m]).
// Throws IndexError when a dataset_index falls outside [1, C], DomainError on
// an empty batch or an empty token-loss row.
double weighted_sft_loss(const WeightedBatch& batch);

// ---------------------------------------------------------------------------
// GRPO group advantages
// ---------------------------------------------------------------------------

struct GroupRewards {
  Eigen::ArrayXd rewards;  // one entry per valid trajectory in the group
  int group_size = 0;      // G (informational; rewards may be fewer after discards)
};

// A_i = (r_i - mean) / (population std + eps). All-equal rewards map to zero.
Eigen::ArrayXd group_advantages(const GroupRewards& g, double eps);

// ---------------------------------------------------------------------------
// KL-Cov token selection
// ---------------------------------------------------------------------------

struct TokenRecord {
  double logprob = 0.0;      // policy log-probability of the sampled token
  double ref_logprob = 0.0;  // reference model
  double advantage = 0.0;    // broadcast from the token's trajectory
};

struct KlCovSelection {
  std::vector<bool> mask;    // selected ceil(fraction * N) tokens
  Eigen::ArrayXd kl_terms;   // ref_logprob - logprob where masked, 0 elsewhere
};

// Covariance score c_t = (A_t - mean A) * (logprob_t - mean logprob); the mask
// keeps the ceil(fraction * N) largest scores, ties resolved toward the lower
// index. Throws DomainError on empty tokens or fraction outside (0, 1].
KlCovSelection klcov_select(std::span<const TokenRecord> tokens, double fraction);

// ---------------------------------------------------------------------------
// pass@k
// ---------------------------------------------------------------------------

// Unbiased estimator 1 - C(G-c, k) / C(G, k) from G rollouts with c successes.
// Throws DomainError unless 0 <= c <= G and 1 <= k <= G.
double pass_at_k(int G, int c, int k);

}  // namespace webrl::policy

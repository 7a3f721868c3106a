#include "webrl/policy/math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace webrl::policy {

Eigen::ArrayXd effective_weights(const WeightConfig& cfg) {
  if (cfg.k <= 0.0 || !std::isfinite(cfg.k))
    throw DomainError("effective_weights: scaling factor k must be positive");
  if (cfg.counts.empty()) throw DomainError("effective_weights: no datasets");

  const auto C = Eigen::Index(cfg.counts.size());
  // 1 - beta = 10^-k exactly; beta^n evaluated through log1p/expm1 so the
  // k->0 and k->large limits stay accurate for large counts.
  const double one_minus_beta = std::pow(10.0, -cfg.k);
  const double log_beta = std::log1p(-one_minus_beta);

  Eigen::ArrayXd inv_effective(C);
  for (Eigen::Index i = 0; i < C; ++i) {
    const std::int64_t n = cfg.counts[i];
    if (n < 1) throw DomainError("effective_weights: counts must be >= 1");
    const double effective = -std::expm1(double(n) * log_beta) / one_minus_beta;
    inv_effective[i] = 1.0 / effective;
  }
  return double(C) * inv_effective / inv_effective.sum();
}

double weighted_sft_loss(const WeightedBatch& batch) {
  if (batch.samples.empty()) throw DomainError("weighted_sft_loss: empty batch");
  const auto C = batch.weights.size();
  double acc = 0.0;
  for (const WeightedSample& s : batch.samples) {
    if (s.dataset_index < 1 || s.dataset_index > C)
      throw IndexError("weighted_sft_loss: dataset_index " +
                       std::to_string(s.dataset_index) + " outside [1, " +
                       std::to_string(C) + "]");
    if (s.token_losses.size() == 0)
      throw DomainError("weighted_sft_loss: sample with no token losses");
    acc += batch.weights[s.dataset_index - 1] * s.token_losses.mean();
  }
  return acc / double(batch.samples.size());
}

Eigen::ArrayXd group_advantages(const GroupRewards& g, double eps) {
  if (g.rewards.size() == 0) throw DomainError("group_advantages: empty group");
  const double mean = g.rewards.mean();
  const Eigen::ArrayXd centered = g.rewards - mean;
  const double pop_std = std::sqrt(centered.square().mean());
  const double denom = pop_std + eps;
  if (denom == 0.0) return Eigen::ArrayXd::Zero(g.rewards.size());
  return centered / denom;
}

KlCovSelection klcov_select(std::span<const TokenRecord> tokens, double fraction) {
  if (tokens.empty()) throw DomainError("klcov_select: no tokens");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw DomainError("klcov_select: fraction must lie in (0, 1]");

  const auto n = Eigen::Index(tokens.size());
  Eigen::ArrayXd adv(n), logp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    adv[i] = tokens[i].advantage;
    logp[i] = tokens[i].logprob;
  }
  const Eigen::ArrayXd scores = (adv - adv.mean()) * (logp - logp.mean());

  const auto keep = Eigen::Index(std::ceil(fraction * double(n)));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });

  KlCovSelection out;
  out.mask.assign(std::size_t(n), false);
  out.kl_terms = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index r = 0; r < keep; ++r) {
    const Eigen::Index t = order[r];
    out.mask[std::size_t(t)] = true;
    out.kl_terms[t] = tokens[t].ref_logprob - tokens[t].logprob;
  }
  return out;
}

double pass_at_k(int G, int c, int k) {
  if (G < 1 || c < 0 || c > G || k < 1 || k > G)
    throw DomainError("pass_at_k: need 0 <= c <= G and 1 <= k <= G");
  if (G - c < k) return 1.0;
  // 1 - C(G-c, k)/C(G, k) as a running product to stay in range.
  double ratio = 1.0;
  for (int i = 0; i < k; ++i) {
    ratio *= double(G - c - i) / double(G - i);
  }
  return 1.0 - ratio;
}

}  // namespace webrl::policy

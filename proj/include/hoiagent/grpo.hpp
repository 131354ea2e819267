#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoiagent::grpo {

/// Aligned per-token log-probabilities of one sampled sequence under the
/// current, old and reference policies. All three vectors have the same
/// length T >= 1 and non-positive entries.
struct LogprobTrace {
  std::vector<double> theta;
  std::vector<double> old_policy;
  std::vector<double> reference;

  size_t tokens() const { return theta.size(); }
};

/// One group of G rollouts for a single query.
struct RolloutGroup {
  std::string query_id;
  std::vector<double> rewards;
  std::vector<LogprobTrace> traces;  // empty when only advantages are needed
};

struct GroupAdvantages {
  std::vector<double> advantages;
  std::vector<double> kl_per_rollout;
  double objective_value = 0.0;
  double beta = 0.0;
};

struct GrpoOptions {
  double beta = 0.04;
  /// PPO-style ratio clipping for the benefit of external trainers. The
  /// printed objective has no clip term, so this stays disabled by default.
  std::optional<double> clip_epsilon;
};

/// Group-normalized advantages: (r_i - mean) / pop_std, guarded by
/// eps_std = 1e-8 — a group whose reward deviation falls at or below the
/// guard (an all-equal group in particular) yields all-zero advantages.
/// Throws std::invalid_argument for fewer than two rewards or non-finite
/// input.
std::vector<double> advantages(std::span<const double> rewards);

/// Per-token KL penalty value: with rho = exp(logp_ref - logp_theta),
/// returns rho - log(rho) - 1 >= 0. The log-difference is clamped to +-30
/// before exponentiation.
double kl_value(double logp_theta, double logp_ref);

/// Surrogate objective diagnostics for one rollout group: sequence-level
/// importance ratios from summed log-probs, token-mean KL per rollout, and
/// the group objective mean(ratio_i * A_i) - beta * mean(KL_i). Pure value
/// computation; no parameters are updated here. Throws
/// std::invalid_argument on missing or misaligned traces.
GroupAdvantages grpo_objective(const RolloutGroup& group, const GrpoOptions& options = {});

/// Token-mean negative log-likelihood of a target reasoning trace. Throws
/// std::invalid_argument on an empty trace.
double sft_nll(std::span<const double> token_logprobs);

}  // namespace hoiagent::grpo

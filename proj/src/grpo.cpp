#include "hoiagent/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hoiagent::grpo {

namespace {

constexpr double kStdStabilizer = 1e-8;
constexpr double kLogRatioClamp = 30.0;

double sum(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0);
}

}  // namespace

std::vector<double> advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("advantages require a group of at least 2 rewards");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("rewards must be finite");
  }
  const double n = static_cast<double>(rewards.size());
  const double mean = sum(rewards) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;  // population variance, no Bessel correction
  const double std_dev = std::sqrt(var);

  std::vector<double> out(rewards.size(), 0.0);
  // Collapsed groups carry no ranking signal; the guard keeps them at zero
  // instead of dividing by (nearly) nothing. Above the guard the z-score is
  // exact, which keeps it invariant under positive affine reward maps.
  if (std_dev <= kStdStabilizer) return out;
  for (size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std_dev;
  return out;
}

double kl_value(double logp_theta, double logp_ref) {
  double d = logp_ref - logp_theta;
  d = std::clamp(d, -kLogRatioClamp, kLogRatioClamp);
  // rho - log(rho) - 1 with log(rho) = d exactly; expm1 keeps the value
  // accurate (and non-negative) for small differences.
  return std::expm1(d) - d;
}

GroupAdvantages grpo_objective(const RolloutGroup& group, const GrpoOptions& options) {
  const size_t g = group.rewards.size();
  if (group.traces.size() != g) {
    throw std::invalid_argument("group needs one logprob trace per reward");
  }
  if (options.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  for (const auto& trace : group.traces) {
    if (trace.tokens() == 0 || trace.old_policy.size() != trace.tokens() ||
        trace.reference.size() != trace.tokens()) {
      throw std::invalid_argument("logprob trace vectors must be aligned and non-empty");
    }
  }

  GroupAdvantages out;
  out.beta = options.beta;
  out.advantages = advantages(group.rewards);
  out.kl_per_rollout.resize(g);

  double policy_term = 0.0;
  double kl_term = 0.0;
  for (size_t i = 0; i < g; ++i) {
    const auto& trace = group.traces[i];
    const double log_ratio =
        std::clamp(sum(trace.theta) - sum(trace.old_policy), -kLogRatioClamp, kLogRatioClamp);
    const double ratio = std::exp(log_ratio);

    double kl = 0.0;
    for (size_t t = 0; t < trace.tokens(); ++t) {
      kl += kl_value(trace.theta[t], trace.reference[t]);
    }
    kl /= static_cast<double>(trace.tokens());
    out.kl_per_rollout[i] = kl;

    double term = ratio * out.advantages[i];
    if (options.clip_epsilon) {
      const double clipped =
          std::clamp(ratio, 1.0 - *options.clip_epsilon, 1.0 + *options.clip_epsilon);
      term = std::min(term, clipped * out.advantages[i]);
    }
    policy_term += term;
    kl_term += kl;
  }
  out.objective_value =
      policy_term / static_cast<double>(g) - options.beta * kl_term / static_cast<double>(g);
  return out;
}

double sft_nll(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) {
    throw std::invalid_argument("sft_nll requires at least one token");
  }
  return -sum(token_logprobs) / static_cast<double>(token_logprobs.size());
}

}  // namespace hoiagent::grpo

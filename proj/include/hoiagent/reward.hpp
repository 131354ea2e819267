#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hoiagent/errors.hpp"
#include "hoiagent/protocol.hpp"
#include "hoiagent/records.hpp"

namespace hoiagent::reward {

/// Thresholds and component magnitudes of the composite reward.
struct RewardConfig {
  double delta = 0.8;         // label-similarity threshold (strict >)
  double eta = 0.5;           // IoU threshold (strict >)
  double epsilon = 1e-6;      // F1 stabilizer
  double format_value = 0.5;  // reward granted when both turns are well-formed
  double tool_value = 0.2;    // flat per-trajectory tool reward

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Label similarity scorer in [-1, 1]. Must be symmetric and return 1 for
/// identical labels. Implementations must be safe for concurrent calls.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double score(const EntityLabel& a, const EntityLabel& b) const = 0;
  /// Optional batch warm-up; remote providers fetch all labels in one call.
  virtual void prime(std::span<const EntityLabel> labels) const { (void)labels; }
};

/// 1.0 on normalized string equality, 0.0 otherwise. With delta = 0.8 the
/// similarity gate degenerates to exact match.
class ExactMatchProvider final : public SimilarityProvider {
 public:
  double score(const EntityLabel& a, const EntityLabel& b) const override {
    return a == b ? 1.0 : 0.0;
  }
};

/// A remote or in-process vector service: labels in, unit-norm embedding
/// vectors out (one per label, fixed dimension). Transport failures must
/// surface as TransportError.
class VectorClient {
 public:
  virtual ~VectorClient() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& labels) = 0;
};

/// Cosine similarity as the dot product of cached unit vectors. Vector
/// fetches go through the client once per label; the cache is read-mostly
/// and safe for concurrent scoring. Transport failures propagate — the
/// caller never sees a silent 0.
class EmbeddingProvider final : public SimilarityProvider {
 public:
  explicit EmbeddingProvider(std::shared_ptr<VectorClient> client);

  double score(const EntityLabel& a, const EntityLabel& b) const override;
  void prime(std::span<const EntityLabel> labels) const override;

 private:
  using Vector = std::shared_ptr<const std::vector<double>>;
  Vector vector_for(const EntityLabel& label) const;
  // Caller must hold mutex_ exclusively.
  void fetch_missing(const std::vector<std::string>& labels) const;

  std::shared_ptr<VectorClient> client_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, Vector> cache_;
  mutable size_t dimension_ = 0;
};

/// Binary prediction-vs-ground-truth compatibility matrix, row-major
/// n_pred x n_gt. Row i / column j correspond to the i-th prediction and
/// j-th ground-truth triplet of the input lists.
struct AffinityMatrix {
  int n_pred = 0;
  int n_gt = 0;
  std::vector<std::uint8_t> entries;

  std::uint8_t at(int i, int j) const { return entries[static_cast<size_t>(i) * n_gt + j]; }
};

/// s_ij = 1 iff both label similarities exceed delta and both box IoUs
/// exceed eta (all strict inequalities); 0 otherwise.
AffinityMatrix affinity(std::span<const HOITriplet> pred, std::span<const HOITriplet> gt,
                        const RewardConfig& cfg, const SimilarityProvider& sim);

/// One-to-one assignment between predictions and ground truth.
struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (pred index, gt index), sorted by pred index
  int tp = 0;                              // matched pairs with affinity 1
};

/// Minimum-cost assignment of size min(n_pred, n_gt) over the cost matrix
/// c_ij = 1 - s_ij, solved with the Hungarian algorithm. With binary costs
/// the resulting tp equals the maximum bipartite matching size of the
/// affinity graph.
Matching optimal_assignment(const AffinityMatrix& s);

struct HoiReward {
  double r_hoi = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  Matching matching;
};

/// F1 reward: P = TP/N_p, R = TP/N_g, r = 2PR/(P+R+epsilon). An empty
/// prediction or ground-truth set yields zero rates and zero reward.
HoiReward hoi_reward(std::span<const HOITriplet> pred, std::span<const HOITriplet> gt,
                     const RewardConfig& cfg, const SimilarityProvider& sim);

/// One tool invocation outcome within a trajectory.
struct ToolUse {
  protocol::ToolKind kind;
  bool success = false;
};

/// Flat per-trajectory tool reward, gated on a nonzero HOI reward and at
/// least one successful invocation.
double tool_reward(std::span<const ToolUse> invocations, double r_hoi,
                   const RewardConfig& cfg);

enum class AnswerParseMode { strict, salvage };

struct RewardBreakdown {
  double r_hoi = 0.0;
  double r_format = 0.0;
  double r_tool = 0.0;
  double total = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  Matching matching;
  bool format_ok = false;
  int n_pred = 0;
  int n_gt = 0;
};

/// Assembles the composite trajectory reward from the raw turn texts, the
/// ground truth and the tool log. In strict mode (the default) an
/// unparseable Turn-2 answer contributes zero predictions; salvage mode
/// keeps the well-formed records. The format component is judged on the
/// strict grammar in both modes.
RewardBreakdown total_reward(std::string_view turn1_raw, std::string_view turn2_raw,
                             std::span<const HOITriplet> gt,
                             std::span<const ToolUse> tool_log,
                             const RewardConfig& cfg, const SimilarityProvider& sim,
                             AnswerParseMode mode = AnswerParseMode::strict);

}  // namespace hoiagent::reward

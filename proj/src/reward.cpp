#include "hoiagent/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "hoiagent/geometry.hpp"

namespace hoiagent::reward {

void RewardConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(delta)) throw std::invalid_argument("delta must lie in (0,1]");
  if (!in_unit(eta)) throw std::invalid_argument("eta must lie in (0,1]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (format_value < 0.0) throw std::invalid_argument("format_value must be >= 0");
  if (tool_value < 0.0) throw std::invalid_argument("tool_value must be >= 0");
}

EmbeddingProvider::EmbeddingProvider(std::shared_ptr<VectorClient> client)
    : client_(std::move(client)) {
  if (!client_) throw std::invalid_argument("EmbeddingProvider requires a client");
}

void EmbeddingProvider::fetch_missing(const std::vector<std::string>& labels) const {
  if (labels.empty()) return;
  auto vectors = client_->embed(labels);
  if (vectors.size() != labels.size()) {
    throw DataError("embedding service returned " + std::to_string(vectors.size()) +
                    " vectors for " + std::to_string(labels.size()) + " labels");
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (dimension_ == 0) dimension_ = vectors[i].size();
    if (vectors[i].empty() || vectors[i].size() != dimension_) {
      throw DataError("embedding dimension mismatch for label '" + labels[i] + "'");
    }
    cache_[labels[i]] = std::make_shared<const std::vector<double>>(std::move(vectors[i]));
  }
}

EmbeddingProvider::Vector EmbeddingProvider::vector_for(const EntityLabel& label) const {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(label.str());
    if (it != cache_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = cache_.find(label.str());
  if (it != cache_.end()) return it->second;
  fetch_missing({label.str()});
  return cache_.at(label.str());
}

void EmbeddingProvider::prime(std::span<const EntityLabel> labels) const {
  std::vector<std::string> missing;
  {
    std::shared_lock lock(mutex_);
    for (const auto& label : labels) {
      if (!cache_.contains(label.str())) missing.push_back(label.str());
    }
  }
  if (missing.empty()) return;
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::unique_lock lock(mutex_);
  std::erase_if(missing, [&](const std::string& l) { return cache_.contains(l); });
  fetch_missing(missing);
}

double EmbeddingProvider::score(const EntityLabel& a, const EntityLabel& b) const {
  if (a == b) return 1.0;
  auto va = vector_for(a);
  auto vb = vector_for(b);
  double dot = 0.0;
  for (size_t i = 0; i < va->size(); ++i) dot += (*va)[i] * (*vb)[i];
  return dot;
}

AffinityMatrix affinity(std::span<const HOITriplet> pred, std::span<const HOITriplet> gt,
                        const RewardConfig& cfg, const SimilarityProvider& sim) {
  AffinityMatrix m;
  m.n_pred = static_cast<int>(pred.size());
  m.n_gt = static_cast<int>(gt.size());
  m.entries.assign(static_cast<size_t>(m.n_pred) * m.n_gt, 0);

  std::vector<EntityLabel> labels;
  labels.reserve(2 * (pred.size() + gt.size()));
  for (const auto& t : pred) { labels.push_back(t.verb); labels.push_back(t.object); }
  for (const auto& t : gt) { labels.push_back(t.verb); labels.push_back(t.object); }
  sim.prime(labels);

  for (int i = 0; i < m.n_pred; ++i) {
    for (int j = 0; j < m.n_gt; ++j) {
      const auto& p = pred[i];
      const auto& g = gt[j];
      // Cheap spatial gates first; similarity scores may be remote.
      if (!(iou(p.human_box, g.human_box) > cfg.eta)) continue;
      if (!(iou(p.object_box, g.object_box) > cfg.eta)) continue;
      if (!(sim.score(p.verb, g.verb) > cfg.delta)) continue;
      if (!(sim.score(p.object, g.object) > cfg.delta)) continue;
      m.entries[static_cast<size_t>(i) * m.n_gt + j] = 1;
    }
  }
  return m;
}

Matching optimal_assignment(const AffinityMatrix& s) {
  Matching result;
  if (s.n_pred == 0 || s.n_gt == 0) return result;

  // Hungarian algorithm with row/column potentials on the rectangular cost
  // matrix c_ij = 1 - s_ij, rows being the smaller side.
  const bool transposed = s.n_pred > s.n_gt;
  const int n = transposed ? s.n_gt : s.n_pred;  // rows, n <= m
  const int m = transposed ? s.n_pred : s.n_gt;
  auto cost = [&](int row, int col) -> double {
    const std::uint8_t a = transposed ? s.at(col, row) : s.at(row, col);
    return 1.0 - static_cast<double>(a);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> assigned_row(m + 1, 0);  // column -> row (1-based, 0 = free)
  std::vector<int> way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    assigned_row[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = assigned_row[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_reduced[j]) {
          min_reduced[j] = cur;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[assigned_row[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (assigned_row[j0] != 0);
    do {
      const int j1 = way[j0];
      assigned_row[j0] = assigned_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= m; ++j) {
    if (assigned_row[j] == 0) continue;
    int pred_idx = assigned_row[j] - 1;
    int gt_idx = j - 1;
    if (transposed) std::swap(pred_idx, gt_idx);
    result.pairs.emplace_back(pred_idx, gt_idx);
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  for (const auto& [i, j] : result.pairs) {
    if (s.at(i, j) > 0) ++result.tp;
  }
  return result;
}

HoiReward hoi_reward(std::span<const HOITriplet> pred, std::span<const HOITriplet> gt,
                     const RewardConfig& cfg, const SimilarityProvider& sim) {
  HoiReward out;
  if (pred.empty() || gt.empty()) return out;
  out.matching = optimal_assignment(affinity(pred, gt, cfg, sim));
  const double tp = static_cast<double>(out.matching.tp);
  out.precision = tp / static_cast<double>(pred.size());
  out.recall = tp / static_cast<double>(gt.size());
  out.r_hoi = 2.0 * out.precision * out.recall / (out.precision + out.recall + cfg.epsilon);
  return out;
}

double tool_reward(std::span<const ToolUse> invocations, double r_hoi,
                   const RewardConfig& cfg) {
  if (!(r_hoi > 0.0)) return 0.0;
  const bool any_success =
      std::any_of(invocations.begin(), invocations.end(),
                  [](const ToolUse& u) { return u.success; });
  return any_success ? cfg.tool_value : 0.0;
}

RewardBreakdown total_reward(std::string_view turn1_raw, std::string_view turn2_raw,
                             std::span<const HOITriplet> gt,
                             std::span<const ToolUse> tool_log,
                             const RewardConfig& cfg, const SimilarityProvider& sim,
                             AnswerParseMode mode) {
  RewardBreakdown out;
  out.format_ok = protocol::check_format(turn1_raw, turn2_raw);
  out.r_format = out.format_ok ? cfg.format_value : 0.0;

  std::vector<HOITriplet> predictions;
  if (auto env = protocol::extract_envelope(turn2_raw)) {
    if (mode == AnswerParseMode::salvage) {
      predictions = protocol::parse_turn2_salvage(env.value().answer).to_triplets();
    } else if (auto answer = protocol::parse_turn2(env.value().answer)) {
      predictions = answer.value().to_triplets();
    }
  }

  auto hoi = hoi_reward(predictions, gt, cfg, sim);
  out.r_hoi = hoi.r_hoi;
  out.precision = hoi.precision;
  out.recall = hoi.recall;
  out.matching = std::move(hoi.matching);
  out.n_pred = static_cast<int>(predictions.size());
  out.n_gt = static_cast<int>(gt.size());
  out.r_tool = tool_reward(tool_log, out.r_hoi, cfg);
  out.total = out.r_hoi + out.r_format + out.r_tool;
  return out;
}

}  // namespace hoiagent::reward

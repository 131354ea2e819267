#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hoiagent/orchestrator.hpp"
#include "hoiagent/vocabulary.hpp"

namespace hoiagent::datagen {

/// One training-ready trajectory. The field names are the corpus file
/// contract and must stay exactly as listed.
struct PackagedTrajectory {
  std::vector<std::string> detected_objects;
  std::vector<std::string> selected_tools;
  std::string first_turn_output;
  std::string second_turn_output;
  std::string first_turn_prompt;
  std::string second_turn_prompt;
  std::string image_id;

  bool operator==(const PackagedTrajectory&) const = default;
};

void to_json(nlohmann::json& j, const PackagedTrajectory& t);
void from_json(const nlohmann::json& j, PackagedTrajectory& t);

PackagedTrajectory package_trajectory(const agent::Trajectory& trajectory);

enum class ConstraintKind {
  ClosedSetObject,  // object label outside the vocabulary
  VerbConstraint,   // verb not valid for its object
  BoundingBox,      // coordinate outside the original image frame
  Format,           // answer block does not parse
};

std::string to_string(ConstraintKind kind);

struct ConstraintViolation {
  ConstraintKind kind;
  std::string detail;
};

/// Checks the four hard rule constraints against both turn outputs.
/// Violations are data, not exceptions; an empty list is a pass.
std::vector<ConstraintViolation> validate_constraints(const PackagedTrajectory& trajectory,
                                                      const Vocabulary& vocabulary,
                                                      double width, double height);

struct JudgeVerdict {
  bool accept = false;
  double score = 0.0;
  std::vector<std::string> reasons;
};

/// Expert validator interface. Implementations must be deterministic for a
/// fixed configuration and input.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual JudgeVerdict review(const PackagedTrajectory& trajectory) = 0;
};

/// Shipping rule-based stand-in: accepts a trajectory iff it passes every
/// hard constraint and its Turn-2 think block mentions every predicted
/// object label. Solvability (TP >= 1) is enforced upstream by
/// select_solvable before anything reaches a judge.
class RuleBasedJudge final : public JudgeBackend {
 public:
  RuleBasedJudge(Vocabulary vocabulary,
                 std::map<std::string, std::pair<double, double>> image_dims);

  JudgeVerdict review(const PackagedTrajectory& trajectory) override;

 private:
  Vocabulary vocabulary_;
  std::map<std::string, std::pair<double, double>> image_dims_;
};

struct ImageRollouts {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<agent::Trajectory> trajectories;
};

struct KeptImage {
  std::string image_id;
  std::vector<agent::Trajectory> trajectories;
};

/// Keeps an image iff some rollout scored TP >= 1; within a kept image,
/// retains every rollout with TP >= 1 that passes validate_constraints.
/// Images whose retained set ends up empty are dropped.
std::vector<KeptImage> select_solvable(const std::vector<ImageRollouts>& images,
                                       const Vocabulary& vocabulary);

/// A packaged trajectory plus its balancing key (the category of its first
/// answer record, "verb|object").
struct CorpusCandidate {
  PackagedTrajectory trajectory;
  std::string category;
};

std::string candidate_category(const agent::Trajectory& trajectory);

struct SplitTargets {
  size_t sft_size = 6000;
  size_t rl_size = 8000;
};

struct CorpusSplit {
  std::vector<PackagedTrajectory> sft;
  std::vector<PackagedTrajectory> rl;
  std::vector<std::string> warnings;
  std::map<std::string, int> sft_per_category;
  std::map<std::string, int> rl_per_category;
};

/// Splits candidates into the SFT and RL corpora. The judge gates SFT
/// membership; the RL set draws from everything not selected for SFT (the
/// rollouts were already confirmed successful upstream). Both selections
/// balance across categories by greedy round-robin over sorted category
/// buckets, so per-category counts differ by at most one whenever supply
/// permits. The sets are disjoint by construction; shortfalls produce
/// warnings, not errors.
CorpusSplit split_corpora(const std::vector<CorpusCandidate>& candidates,
                          JudgeBackend& judge, const SplitTargets& targets);

}  // namespace hoiagent::datagen

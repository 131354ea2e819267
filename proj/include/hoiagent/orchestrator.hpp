#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoiagent/artifacts.hpp"
#include "hoiagent/backends.hpp"
#include "hoiagent/grpo.hpp"
#include "hoiagent/protocol.hpp"
#include "hoiagent/records.hpp"
#include "hoiagent/reward.hpp"
#include "hoiagent/vocabulary.hpp"

namespace hoiagent::agent {

enum class WorkflowStage {
  Init,
  Turn1Requested,
  Turn1Parsed,
  ToolsExecuting,
  Turn2Requested,
  Turn2Parsed,
  Scored,
  Failed,
};

std::string to_string(WorkflowStage stage);
WorkflowStage workflow_stage_from_string(const std::string& s);

/// One tool invocation and whatever evidence it produced. A failed
/// invocation carries a note and contributes nothing but its success flag
/// to the reward path.
struct ToolInvocation {
  protocol::ToolKind kind = protocol::ToolKind::image_crop;
  bool success = false;
  double latency_ms = 0.0;
  std::vector<std::string> texts;
  std::vector<std::string> images;  // artifact references
  std::string note;
};

struct RolloutQuery {
  std::string image_id;
  std::string image_ref;  // path of the source raster (PNG)
  double width = 0.0;
  double height = 0.0;
  std::string query_text;  // empty selects the standard question
  std::vector<HOITriplet> ground_truth;
};

struct RolloutConfig {
  int group_size = 4;  // 16 for data exploration runs
  double temperature = 0.8;
  int max_generation_tokens = 4096;
  int tool_timeout_ms = 10000;
  int retry_count = 2;
  int parallelism = 4;
  reward::RewardConfig reward;
  reward::AnswerParseMode parse_mode = reward::AnswerParseMode::strict;

  void validate() const;
};

/// Complete record of one two-turn rollout.
struct Trajectory {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::uint64_t seed = 0;
  WorkflowStage stage = WorkflowStage::Init;
  std::string failure_reason;  // machine-readable, non-empty iff Failed

  std::string turn1_prompt;
  std::string turn1_raw;
  std::string turn2_prompt;
  std::string turn2_raw;
  std::optional<protocol::Turn1Decision> turn1;
  std::optional<protocol::Turn2Answer> turn2;
  bool turn2_empty_answer = false;

  std::vector<ToolInvocation> tool_log;
  std::vector<HOITriplet> predictions;
  std::optional<reward::RewardBreakdown> reward_breakdown;
};

void to_json(nlohmann::json& j, const ToolInvocation& t);
void from_json(const nlohmann::json& j, ToolInvocation& t);
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

/// Crops the pixel region (intersection of `region` with the image bounds,
/// outer pixel grid) out of a PNG and stores it as a new content-addressed
/// artifact. Throws DataError on unreadable input or an empty intersection.
std::string crop_tool(const ArtifactStore& store, const std::string& image_ref,
                      const BBox& region);

/// Runs the full two-turn state machine for one rollout. Backend transport
/// failures (after retries) produce a Failed trajectory; parse failures and
/// tool faults degrade the trajectory but still reach Scored.
Trajectory run_rollout(const RolloutQuery& query, const Vocabulary& vocabulary,
                       PolicyBackend& policy, ToolBackend& tools,
                       const ArtifactStore& store, const RolloutConfig& config,
                       const reward::SimilarityProvider& similarity, std::uint64_t seed);

struct GroupResult {
  grpo::RolloutGroup group;
  std::vector<Trajectory> trajectories;
};

/// G independent rollouts with seeds derive_seed(master_seed, i), executed
/// with bounded parallelism. Failed rollouts contribute reward 0.
GroupResult run_group(const RolloutQuery& query, const Vocabulary& vocabulary,
                      PolicyBackend& policy, ToolBackend& tools,
                      const ArtifactStore& store, const RolloutConfig& config,
                      const reward::SimilarityProvider& similarity,
                      std::uint64_t master_seed);

}  // namespace hoiagent::agent

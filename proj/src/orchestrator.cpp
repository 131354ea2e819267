#include "hoiagent/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "hoiagent/image_io.hpp"
#include "hoiagent/prompts.hpp"
#include "hoiagent/serialization.hpp"

namespace hoiagent::agent {

namespace {

constexpr size_t kMaxCropPairs = 4;

GenerationResult call_with_retries(PolicyBackend& policy, const GenerationRequest& request,
                                   int retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return policy.generate(request);
    } catch (const TransportError&) {
      if (attempt >= retries) throw;
    }
  }
}

std::string join_text_parts(const std::vector<MessagePart>& parts) {
  std::string out;
  for (const auto& part : parts) {
    if (part.kind != "text") continue;
    if (!out.empty()) out += "\n\n";
    out += part.value;
  }
  return out;
}

BBox union_box(const BBox& a, const BBox& b) {
  return BBox{std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
              std::max(a.y2, b.y2)};
}

BBox expand_and_clamp(BBox b, double width, double height) {
  const double pad_x = 0.1 * (b.x2 - b.x1);
  const double pad_y = 0.1 * (b.y2 - b.y1);
  b.x1 = std::clamp(b.x1 - pad_x, 0.0, width);
  b.y1 = std::clamp(b.y1 - pad_y, 0.0, height);
  b.x2 = std::clamp(b.x2 + pad_x, 0.0, width);
  b.y2 = std::clamp(b.y2 + pad_y, 0.0, height);
  return b;
}

/// Deterministic crop plan: one padded region per person/object pair (the
/// first two of each), else the union of all detections, else the full
/// frame.
std::vector<BBox> crop_regions(const std::optional<protocol::Turn1Decision>& turn1,
                               double width, double height) {
  std::vector<BBox> persons, others;
  if (turn1) {
    for (const auto& [label, box] : turn1->detections) {
      auto& side = label.str().find("person") != std::string::npos ? persons : others;
      if (side.size() < 2) side.push_back(box);
    }
  }
  std::vector<BBox> regions;
  if (!persons.empty() && !others.empty()) {
    for (const auto& p : persons) {
      for (const auto& o : others) {
        if (regions.size() >= kMaxCropPairs) break;
        regions.push_back(expand_and_clamp(union_box(p, o), width, height));
      }
    }
  } else if (turn1 && !turn1->detections.empty()) {
    BBox all = turn1->detections.front().second;
    for (const auto& [label, box] : turn1->detections) {
      (void)label;
      all = union_box(all, box);
    }
    regions.push_back(expand_and_clamp(all, width, height));
  } else {
    regions.push_back(BBox{0, 0, width, height});
  }
  return regions;
}

reward::ToolUse to_tool_use(const ToolInvocation& invocation) {
  return reward::ToolUse{invocation.kind, invocation.success};
}

std::vector<HOITriplet> extract_predictions(const std::string& turn2_raw,
                                            reward::AnswerParseMode mode) {
  auto env = protocol::extract_envelope(turn2_raw);
  if (!env) return {};
  if (mode == reward::AnswerParseMode::salvage) {
    return protocol::parse_turn2_salvage(env.value().answer).to_triplets();
  }
  auto answer = protocol::parse_turn2(env.value().answer);
  if (!answer) return {};
  return answer.value().to_triplets();
}

}  // namespace

std::string to_string(WorkflowStage stage) {
  switch (stage) {
    case WorkflowStage::Init: return "init";
    case WorkflowStage::Turn1Requested: return "turn1_requested";
    case WorkflowStage::Turn1Parsed: return "turn1_parsed";
    case WorkflowStage::ToolsExecuting: return "tools_executing";
    case WorkflowStage::Turn2Requested: return "turn2_requested";
    case WorkflowStage::Turn2Parsed: return "turn2_parsed";
    case WorkflowStage::Scored: return "scored";
    case WorkflowStage::Failed: return "failed";
  }
  return "init";
}

WorkflowStage workflow_stage_from_string(const std::string& s) {
  if (s == "init") return WorkflowStage::Init;
  if (s == "turn1_requested") return WorkflowStage::Turn1Requested;
  if (s == "turn1_parsed") return WorkflowStage::Turn1Parsed;
  if (s == "tools_executing") return WorkflowStage::ToolsExecuting;
  if (s == "turn2_requested") return WorkflowStage::Turn2Requested;
  if (s == "turn2_parsed") return WorkflowStage::Turn2Parsed;
  if (s == "scored") return WorkflowStage::Scored;
  if (s == "failed") return WorkflowStage::Failed;
  throw DataError("unknown workflow stage '" + s + "'");
}

void RolloutConfig::validate() const {
  if (group_size < 1) throw std::invalid_argument("group_size must be >= 1");
  if (tool_timeout_ms <= 0) throw std::invalid_argument("tool timeout must be positive");
  if (retry_count < 0) throw std::invalid_argument("retry_count must be >= 0");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (max_generation_tokens < 1) {
    throw std::invalid_argument("max_generation_tokens must be >= 1");
  }
  if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  reward.validate();
}

std::string crop_tool(const ArtifactStore& store, const std::string& image_ref,
                      const BBox& region) {
  const Image source = read_png(image_ref);
  const int x0 = std::max(0, static_cast<int>(std::floor(region.x1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(region.y1)));
  const int x1 = std::min(source.width, static_cast<int>(std::ceil(region.x2)));
  const int y1 = std::min(source.height, static_cast<int>(std::ceil(region.y2)));
  if (x0 >= x1 || y0 >= y1) {
    throw DataError("crop region does not intersect the image bounds");
  }
  const Image cropped = crop_pixels(source, x0, y0, x1, y1);
  return store.put(encode_png(cropped), "png");
}

Trajectory run_rollout(const RolloutQuery& query, const Vocabulary& vocabulary,
                       PolicyBackend& policy, ToolBackend& tools,
                       const ArtifactStore& store, const RolloutConfig& config,
                       const reward::SimilarityProvider& similarity, std::uint64_t seed) {
  config.validate();
  Trajectory t;
  t.image_id = query.image_id;
  t.width = query.width;
  t.height = query.height;
  t.seed = seed;

  SamplingParams sampling;
  sampling.temperature = config.temperature;
  sampling.max_tokens = config.max_generation_tokens;
  sampling.seed = seed;

  // Turn 1: perception and tool selection.
  GenerationRequest turn1_request;
  Message turn1_message;
  turn1_message.role = "user";
  turn1_message.parts.push_back({"image", query.image_ref});
  turn1_message.parts.push_back(
      {"text", build_turn1_instruction(vocabulary, query.query_text)});
  turn1_request.messages.push_back(turn1_message);
  turn1_request.sampling = sampling;
  t.turn1_prompt = join_text_parts(turn1_message.parts);

  t.stage = WorkflowStage::Turn1Requested;
  try {
    t.turn1_raw = call_with_retries(policy, turn1_request, config.retry_count).text;
  } catch (const TransportError& e) {
    t.stage = WorkflowStage::Failed;
    t.failure_reason = std::string("transport: ") + e.what();
    return t;
  }

  if (auto env = protocol::extract_envelope(t.turn1_raw)) {
    if (auto decision = protocol::parse_turn1(env.value().answer)) {
      t.turn1 = std::move(decision).value();
    }
  }
  t.stage = WorkflowStage::Turn1Parsed;
  // A malformed Turn-1 degrades to no detections and no tools; the format
  // reward already accounts for it.

  if (t.turn1 && !t.turn1->tools.empty()) {
    t.stage = WorkflowStage::ToolsExecuting;
    for (protocol::ToolKind kind : t.turn1->tools) {
      ToolInvocation invocation;
      invocation.kind = kind;
      if (kind == protocol::ToolKind::image_crop) {
        // Executed locally and deterministically.
        for (const BBox& region : crop_regions(t.turn1, query.width, query.height)) {
          try {
            invocation.images.push_back(crop_tool(store, query.image_ref, region));
          } catch (const std::exception& e) {
            if (!invocation.note.empty()) invocation.note += "; ";
            invocation.note += e.what();
          }
        }
        invocation.success = !invocation.images.empty();
      } else {
        ToolRequest request;
        request.tool = protocol::to_string(kind);
        request.args = {{"image_id", query.image_id},
                        {"width", query.width},
                        {"height", query.height}};
        if (t.turn1) {
          auto labels = nlohmann::json::array();
          for (const auto& [label, box] : t.turn1->detections) {
            (void)box;
            labels.push_back(label.str());
          }
          request.args["detected_objects"] = labels;
        }
        request.images.push_back(query.image_ref);
        try {
          ToolResponse response = tools.execute(request);
          invocation.success = response.success;
          invocation.texts = std::move(response.texts);
          invocation.images = std::move(response.images);
          invocation.latency_ms = response.latency_ms;
        } catch (const std::exception& e) {
          invocation.success = false;
          invocation.note = e.what();
        }
      }
      t.tool_log.push_back(std::move(invocation));
    }
  }

  // Turn 2: fixed evidence order — original image, crops, generative images
  // (each behind its governance notice), then the textual instruction block.
  GenerationRequest turn2_request;
  Message turn2_message;
  turn2_message.role = "user";
  turn2_message.parts.push_back({"image", query.image_ref});
  std::vector<std::string> evidence_texts;
  for (const auto& invocation : t.tool_log) {
    if (invocation.kind == protocol::ToolKind::image_crop) {
      for (const auto& ref : invocation.images) turn2_message.parts.push_back({"image", ref});
    }
  }
  for (const auto& invocation : t.tool_log) {
    if (invocation.kind == protocol::ToolKind::outpaint ||
        invocation.kind == protocol::ToolKind::viewpoint_transform) {
      for (const auto& ref : invocation.images) {
        turn2_message.parts.push_back({"text", supplementary_image_notice()});
        turn2_message.parts.push_back({"image", ref});
      }
    }
  }
  for (const auto& invocation : t.tool_log) {
    if (invocation.kind == protocol::ToolKind::action_description ||
        invocation.kind == protocol::ToolKind::scene_explanation) {
      for (const auto& text : invocation.texts) evidence_texts.push_back(text);
    }
  }
  turn2_message.parts.push_back(
      {"text", build_turn2_instruction(t.turn1, vocabulary, evidence_texts, query.query_text)});
  turn2_request.messages.push_back(turn2_message);
  turn2_request.sampling = sampling;
  t.turn2_prompt = join_text_parts(turn2_message.parts);

  t.stage = WorkflowStage::Turn2Requested;
  try {
    t.turn2_raw = call_with_retries(policy, turn2_request, config.retry_count).text;
  } catch (const TransportError& e) {
    t.stage = WorkflowStage::Failed;
    t.failure_reason = std::string("transport: ") + e.what();
    return t;
  }

  if (auto env = protocol::extract_envelope(t.turn2_raw)) {
    auto answer = protocol::parse_turn2(env.value().answer);
    if (answer) {
      t.turn2 = std::move(answer).value();
    } else if (answer.error().kind == protocol::ParseErrorKind::EmptyAnswer) {
      t.turn2_empty_answer = true;
    }
  }
  t.stage = WorkflowStage::Turn2Parsed;
  t.predictions = extract_predictions(t.turn2_raw, config.parse_mode);

  std::vector<reward::ToolUse> uses;
  uses.reserve(t.tool_log.size());
  for (const auto& invocation : t.tool_log) uses.push_back(to_tool_use(invocation));
  t.reward_breakdown =
      reward::total_reward(t.turn1_raw, t.turn2_raw, query.ground_truth, uses,
                           config.reward, similarity, config.parse_mode);
  t.stage = WorkflowStage::Scored;
  return t;
}

GroupResult run_group(const RolloutQuery& query, const Vocabulary& vocabulary,
                      PolicyBackend& policy, ToolBackend& tools,
                      const ArtifactStore& store, const RolloutConfig& config,
                      const reward::SimilarityProvider& similarity,
                      std::uint64_t master_seed) {
  config.validate();
  const int g = config.group_size;
  GroupResult result;
  result.trajectories.resize(static_cast<size_t>(g));

  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= g) break;
      const std::uint64_t seed = derive_seed(master_seed, i);
      try {
        result.trajectories[static_cast<size_t>(i)] =
            run_rollout(query, vocabulary, policy, tools, store, config, similarity, seed);
      } catch (const std::exception& e) {
        Trajectory failed;
        failed.image_id = query.image_id;
        failed.width = query.width;
        failed.height = query.height;
        failed.seed = seed;
        failed.stage = WorkflowStage::Failed;
        failed.failure_reason = std::string("internal: ") + e.what();
        result.trajectories[static_cast<size_t>(i)] = std::move(failed);
      }
    }
  };

  const int workers = std::min(config.parallelism, g);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();

  result.group.query_id = query.image_id;
  result.group.rewards.reserve(static_cast<size_t>(g));
  for (const auto& trajectory : result.trajectories) {
    result.group.rewards.push_back(
        trajectory.reward_breakdown ? trajectory.reward_breakdown->total : 0.0);
  }
  return result;
}

void to_json(nlohmann::json& j, const ToolInvocation& t) {
  j = nlohmann::json{{"tool", protocol::to_string(t.kind)},
                     {"success", t.success},
                     {"latency_ms", t.latency_ms},
                     {"texts", t.texts},
                     {"images", t.images},
                     {"note", t.note}};
}

void from_json(const nlohmann::json& j, ToolInvocation& t) {
  auto kind = protocol::tool_from_string(j.at("tool").get<std::string>());
  if (!kind) throw DataError("unknown tool '" + j.at("tool").get<std::string>() + "'");
  t.kind = *kind;
  t.success = j.value("success", false);
  t.latency_ms = j.value("latency_ms", 0.0);
  t.texts = j.value("texts", std::vector<std::string>{});
  t.images = j.value("images", std::vector<std::string>{});
  t.note = j.value("note", "");
}

void to_json(nlohmann::json& j, const Trajectory& t) {
  j = nlohmann::json{{"image_id", t.image_id},
                     {"width", t.width},
                     {"height", t.height},
                     {"seed", t.seed},
                     {"stage", to_string(t.stage)},
                     {"failure_reason", t.failure_reason},
                     {"turn1_prompt", t.turn1_prompt},
                     {"turn1_raw", t.turn1_raw},
                     {"turn2_prompt", t.turn2_prompt},
                     {"turn2_raw", t.turn2_raw},
                     {"turn2_empty_answer", t.turn2_empty_answer},
                     {"tool_log", t.tool_log},
                     {"predictions", t.predictions}};
  j["turn1"] = t.turn1 ? nlohmann::json(*t.turn1) : nlohmann::json(nullptr);
  j["turn2"] = t.turn2 ? nlohmann::json(*t.turn2) : nlohmann::json(nullptr);
  j["reward"] = t.reward_breakdown ? nlohmann::json(*t.reward_breakdown)
                                   : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, Trajectory& t) {
  j.at("image_id").get_to(t.image_id);
  t.width = j.value("width", 0.0);
  t.height = j.value("height", 0.0);
  t.seed = j.value("seed", std::uint64_t{0});
  t.stage = workflow_stage_from_string(j.value("stage", "init"));
  t.failure_reason = j.value("failure_reason", "");
  t.turn1_prompt = j.value("turn1_prompt", "");
  t.turn1_raw = j.value("turn1_raw", "");
  t.turn2_prompt = j.value("turn2_prompt", "");
  t.turn2_raw = j.value("turn2_raw", "");
  t.turn2_empty_answer = j.value("turn2_empty_answer", false);
  t.tool_log = j.value("tool_log", std::vector<ToolInvocation>{});
  t.predictions = j.value("predictions", std::vector<HOITriplet>{});
  t.turn1.reset();
  if (j.contains("turn1") && !j["turn1"].is_null()) {
    t.turn1 = j["turn1"].get<protocol::Turn1Decision>();
  }
  t.turn2.reset();
  if (j.contains("turn2") && !j["turn2"].is_null()) {
    t.turn2 = j["turn2"].get<protocol::Turn2Answer>();
  }
  t.reward_breakdown.reset();
  if (j.contains("reward") && !j["reward"].is_null()) {
    t.reward_breakdown = j["reward"].get<reward::RewardBreakdown>();
  }
}

}  // namespace hoiagent::agent

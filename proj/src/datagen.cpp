#include "hoiagent/datagen.hpp"

#include <algorithm>
#include <deque>

#include "hoiagent/serialization.hpp"

namespace hoiagent::datagen {

namespace {

/// Parsed views of both answer blocks; absent optionals mean a Format
/// violation was already reported for that turn.
struct ParsedOutputs {
  std::optional<protocol::Turn1Decision> turn1;
  std::optional<protocol::Turn2Answer> turn2;
  bool turn2_empty = false;
};

ParsedOutputs parse_outputs(const PackagedTrajectory& t,
                            std::vector<ConstraintViolation>* violations) {
  ParsedOutputs out;
  auto env1 = protocol::extract_envelope(t.first_turn_output);
  if (env1) {
    if (auto d = protocol::parse_turn1(env1.value().answer)) {
      out.turn1 = std::move(d).value();
    } else if (violations) {
      violations->push_back({ConstraintKind::Format,
                             "first turn answer: " + d.error().describe()});
    }
  } else if (violations) {
    violations->push_back({ConstraintKind::Format,
                           "first turn envelope: " + env1.error().describe()});
  }
  auto env2 = protocol::extract_envelope(t.second_turn_output);
  if (env2) {
    auto a = protocol::parse_turn2(env2.value().answer);
    if (a) {
      out.turn2 = std::move(a).value();
    } else if (a.error().kind == protocol::ParseErrorKind::EmptyAnswer) {
      out.turn2_empty = true;
    } else if (violations) {
      violations->push_back({ConstraintKind::Format,
                             "second turn answer: " + a.error().describe()});
    }
  } else if (violations) {
    violations->push_back({ConstraintKind::Format,
                           "second turn envelope: " + env2.error().describe()});
  }
  return out;
}

bool box_in_frame(const BBox& b, double width, double height) {
  return b.x2 <= width && b.y2 <= height;  // lower bounds hold by BBox invariant
}

}  // namespace

void to_json(nlohmann::json& j, const PackagedTrajectory& t) {
  j = nlohmann::json{{"detected_objects", t.detected_objects},
                     {"selected_tools", t.selected_tools},
                     {"first_turn_output", t.first_turn_output},
                     {"second_turn_output", t.second_turn_output},
                     {"first_turn_prompt", t.first_turn_prompt},
                     {"second_turn_prompt", t.second_turn_prompt},
                     {"image_id", t.image_id}};
}

void from_json(const nlohmann::json& j, PackagedTrajectory& t) {
  j.at("detected_objects").get_to(t.detected_objects);
  j.at("selected_tools").get_to(t.selected_tools);
  j.at("first_turn_output").get_to(t.first_turn_output);
  j.at("second_turn_output").get_to(t.second_turn_output);
  j.at("first_turn_prompt").get_to(t.first_turn_prompt);
  j.at("second_turn_prompt").get_to(t.second_turn_prompt);
  j.at("image_id").get_to(t.image_id);
}

PackagedTrajectory package_trajectory(const agent::Trajectory& trajectory) {
  PackagedTrajectory out;
  if (trajectory.turn1) {
    for (const auto& [label, box] : trajectory.turn1->detections) {
      (void)box;
      out.detected_objects.push_back(label.str());
    }
    for (auto tool : trajectory.turn1->tools) {
      out.selected_tools.push_back(protocol::to_string(tool));
    }
  }
  out.first_turn_output = trajectory.turn1_raw;
  out.second_turn_output = trajectory.turn2_raw;
  out.first_turn_prompt = trajectory.turn1_prompt;
  out.second_turn_prompt = trajectory.turn2_prompt;
  out.image_id = trajectory.image_id;
  return out;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::ClosedSetObject: return "closed_set_object";
    case ConstraintKind::VerbConstraint: return "verb_constraint";
    case ConstraintKind::BoundingBox: return "bounding_box";
    case ConstraintKind::Format: return "format";
  }
  return "format";
}

std::vector<ConstraintViolation> validate_constraints(const PackagedTrajectory& trajectory,
                                                      const Vocabulary& vocabulary,
                                                      double width, double height) {
  std::vector<ConstraintViolation> violations;
  ParsedOutputs parsed = parse_outputs(trajectory, &violations);

  if (parsed.turn1) {
    for (const auto& [label, box] : parsed.turn1->detections) {
      if (!vocabulary.has_object(label)) {
        violations.push_back({ConstraintKind::ClosedSetObject,
                              "detected object '" + label.str() +
                                  "' is outside the object vocabulary"});
      }
      if (!box_in_frame(box, width, height)) {
        violations.push_back({ConstraintKind::BoundingBox,
                              "detection box for '" + label.str() +
                                  "' leaves the original image frame"});
      }
    }
  }

  if (parsed.turn2) {
    for (const auto& record : parsed.turn2->records) {
      if (!vocabulary.has_object(record.object)) {
        violations.push_back({ConstraintKind::ClosedSetObject,
                              "record " + std::to_string(record.index) + ": object '" +
                                  record.object.str() + "' is outside the object vocabulary"});
      } else if (!vocabulary.verb_allowed(record.object, record.verb)) {
        violations.push_back({ConstraintKind::VerbConstraint,
                              "record " + std::to_string(record.index) + ": verb '" +
                                  record.verb.str() + "' is not valid for object '" +
                                  record.object.str() + "'"});
      }
      if (!box_in_frame(record.human_box, width, height) ||
          !box_in_frame(record.object_box, width, height)) {
        violations.push_back({ConstraintKind::BoundingBox,
                              "record " + std::to_string(record.index) +
                                  ": a box leaves the original image frame"});
      }
    }
  }
  return violations;
}

RuleBasedJudge::RuleBasedJudge(Vocabulary vocabulary,
                               std::map<std::string, std::pair<double, double>> image_dims)
    : vocabulary_(std::move(vocabulary)), image_dims_(std::move(image_dims)) {}

JudgeVerdict RuleBasedJudge::review(const PackagedTrajectory& trajectory) {
  JudgeVerdict verdict;
  double width = 0.0, height = 0.0;
  if (auto it = image_dims_.find(trajectory.image_id); it != image_dims_.end()) {
    width = it->second.first;
    height = it->second.second;
  } else {
    verdict.reasons.push_back("unknown image '" + trajectory.image_id + "'");
    return verdict;
  }

  auto violations = validate_constraints(trajectory, vocabulary_, width, height);
  for (const auto& v : violations) {
    verdict.reasons.push_back(to_string(v.kind) + ": " + v.detail);
  }

  ParsedOutputs parsed = parse_outputs(trajectory, nullptr);
  size_t mentioned = 0, total = 0;
  if (parsed.turn2) {
    auto env = protocol::extract_envelope(trajectory.second_turn_output);
    const std::string think = env ? normalize_label(env.value().think) : std::string();
    for (const auto& record : parsed.turn2->records) {
      ++total;
      if (think.find(record.object.str()) != std::string::npos) {
        ++mentioned;
      } else {
        verdict.reasons.push_back("think block never mentions '" + record.object.str() + "'");
      }
    }
  }

  const bool grounded = total > 0 && mentioned == total;
  verdict.accept = violations.empty() && grounded;
  verdict.score = total == 0 ? 0.0
                             : (violations.empty() ? 0.5 : 0.0) +
                                   0.5 * static_cast<double>(mentioned) /
                                       static_cast<double>(total);
  return verdict;
}

std::vector<KeptImage> select_solvable(const std::vector<ImageRollouts>& images,
                                       const Vocabulary& vocabulary) {
  std::vector<KeptImage> kept;
  for (const auto& image : images) {
    const bool solvable = std::any_of(
        image.trajectories.begin(), image.trajectories.end(), [](const agent::Trajectory& t) {
          return t.reward_breakdown && t.reward_breakdown->matching.tp >= 1;
        });
    if (!solvable) continue;

    KeptImage keep;
    keep.image_id = image.image_id;
    for (const auto& trajectory : image.trajectories) {
      if (!trajectory.reward_breakdown || trajectory.reward_breakdown->matching.tp < 1) {
        continue;
      }
      if (!validate_constraints(package_trajectory(trajectory), vocabulary, image.width,
                                image.height)
               .empty()) {
        continue;
      }
      keep.trajectories.push_back(trajectory);
    }
    if (!keep.trajectories.empty()) kept.push_back(std::move(keep));
  }
  return kept;
}

std::string candidate_category(const agent::Trajectory& trajectory) {
  if (trajectory.turn2 && !trajectory.turn2->records.empty()) {
    const auto& r = trajectory.turn2->records.front();
    return r.verb.str() + "|" + r.object.str();
  }
  return "";
}

namespace {

/// Greedy round-robin over sorted category buckets: one candidate per
/// bucket per sweep until the target is met or supply runs out.
std::vector<size_t> round_robin_select(
    const std::map<std::string, std::deque<size_t>>& buckets_in, size_t target) {
  auto buckets = buckets_in;
  std::vector<size_t> selected;
  while (selected.size() < target) {
    bool progressed = false;
    for (auto& [category, queue] : buckets) {
      (void)category;
      if (queue.empty()) continue;
      selected.push_back(queue.front());
      queue.pop_front();
      progressed = true;
      if (selected.size() == target) break;
    }
    if (!progressed) break;
  }
  return selected;
}

}  // namespace

CorpusSplit split_corpora(const std::vector<CorpusCandidate>& candidates,
                          JudgeBackend& judge, const SplitTargets& targets) {
  CorpusSplit out;

  std::vector<bool> accepted(candidates.size(), false);
  for (size_t i = 0; i < candidates.size(); ++i) {
    accepted[i] = judge.review(candidates[i].trajectory).accept;
  }

  std::map<std::string, std::deque<size_t>> sft_buckets;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (accepted[i]) sft_buckets[candidates[i].category].push_back(i);
  }
  const auto sft_indices = round_robin_select(sft_buckets, targets.sft_size);
  std::vector<bool> in_sft(candidates.size(), false);
  for (size_t i : sft_indices) in_sft[i] = true;

  // The RL pool is everything confirmed-successful that SFT did not take;
  // the judge gate applies to SFT membership only.
  std::map<std::string, std::deque<size_t>> rl_buckets;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!in_sft[i]) rl_buckets[candidates[i].category].push_back(i);
  }
  const auto rl_indices = round_robin_select(rl_buckets, targets.rl_size);

  for (size_t i : sft_indices) {
    out.sft.push_back(candidates[i].trajectory);
    ++out.sft_per_category[candidates[i].category];
  }
  for (size_t i : rl_indices) {
    out.rl.push_back(candidates[i].trajectory);
    ++out.rl_per_category[candidates[i].category];
  }

  if (out.sft.size() < targets.sft_size) {
    out.warnings.push_back("sft corpus short of target: " + std::to_string(out.sft.size()) +
                           "/" + std::to_string(targets.sft_size) +
                           " (judge-accepted supply exhausted)");
  }
  if (out.rl.size() < targets.rl_size) {
    out.warnings.push_back("rl corpus short of target: " + std::to_string(out.rl.size()) +
                           "/" + std::to_string(targets.rl_size) + " (supply exhausted)");
  }
  return out;
}

}  // namespace hoiagent::datagen

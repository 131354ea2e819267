#include <doctest.h>

#include <set>

#include "hoiagent/datagen.hpp"
#include "hoiagent/serialization.hpp"
#include "support/mock_fixture.hpp"
#include "support/test_util.hpp"

using namespace hoiagent;
using namespace hoiagent::datagen;
using testutil::label;

namespace {

agent::Trajectory make_trajectory(const std::string& image_id, const std::string& turn1_raw,
                                  const std::string& turn2_raw, int tp) {
  agent::Trajectory t;
  t.image_id = image_id;
  t.width = 128;
  t.height = 128;
  t.stage = agent::WorkflowStage::Scored;
  t.turn1_raw = turn1_raw;
  t.turn2_raw = turn2_raw;
  t.turn1_prompt = "turn-1 prompt";
  t.turn2_prompt = "turn-2 prompt";
  if (auto env = protocol::extract_envelope(turn1_raw)) {
    if (auto d = protocol::parse_turn1(env.value().answer)) t.turn1 = std::move(d).value();
  }
  if (auto env = protocol::extract_envelope(turn2_raw)) {
    if (auto a = protocol::parse_turn2(env.value().answer)) {
      t.turn2 = std::move(a).value();
      t.predictions = t.turn2->to_triplets();
    }
  }
  reward::RewardBreakdown b;
  b.matching.tp = tp;
  b.r_hoi = tp > 0 ? 0.9 : 0.0;
  b.total = b.r_hoi;
  t.reward_breakdown = b;
  return t;
}

agent::Trajectory good_trajectory(const std::string& image_id = "fixture-image") {
  return make_trajectory(image_id, testutil::fixture_turn1_text(),
                         testutil::fixture_turn2_text(), 3);
}

class AcceptAllJudge final : public JudgeBackend {
 public:
  JudgeVerdict review(const PackagedTrajectory&) override { return {true, 1.0, {}}; }
};

class RejectAllJudge final : public JudgeBackend {
 public:
  JudgeVerdict review(const PackagedTrajectory&) override {
    return {false, 0.0, {"rejected"}};
  }
};

}  // namespace

TEST_CASE("packaging carries the exact corpus field names and round-trips") {
  auto pkg = package_trajectory(good_trajectory());
  CHECK(pkg.detected_objects == std::vector<std::string>{"person", "bicycle"});
  CHECK(pkg.selected_tools == std::vector<std::string>{"image_crop"});
  CHECK(pkg.image_id == "fixture-image");

  nlohmann::json j = pkg;
  for (const char* key : {"detected_objects", "selected_tools", "first_turn_output",
                          "second_turn_output", "first_turn_prompt", "second_turn_prompt",
                          "image_id"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.size() == 7);
  CHECK(j.get<PackagedTrajectory>() == pkg);

  // outputs re-parse under the protocol grammar
  auto env = protocol::extract_envelope(pkg.second_turn_output);
  REQUIRE(env.ok());
  CHECK(protocol::parse_turn2(env.value().answer).ok());
}

TEST_CASE("a fully conformant trajectory passes every hard constraint") {
  auto vocabulary = testutil::fixture_vocabulary();
  auto pkg = package_trajectory(good_trajectory());
  CHECK(validate_constraints(pkg, vocabulary, 128, 128).empty());
}

TEST_CASE("each hard constraint is reported exactly once on its fixture") {
  auto vocabulary = testutil::fixture_vocabulary();
  const std::string turn1 = testutil::fixture_turn1_text();

  auto violation_of = [&](const std::string& turn2) {
    auto pkg = package_trajectory(make_trajectory("img", turn1, turn2, 1));
    return validate_constraints(pkg, vocabulary, 128, 128);
  };

  auto closed_set = violation_of(
      "<think>t</think><answer>1: ride, skateboard, [0,0,10,10], [0,0,10,10]</answer>");
  REQUIRE(closed_set.size() == 1);
  CHECK(closed_set[0].kind == ConstraintKind::ClosedSetObject);

  auto verb = violation_of(
      "<think>t</think><answer>1: pet, bicycle, [0,0,10,10], [0,0,10,10]</answer>");
  REQUIRE(verb.size() == 1);
  CHECK(verb[0].kind == ConstraintKind::VerbConstraint);

  auto box = violation_of(
      "<think>t</think><answer>1: ride, bicycle, [0,0,10,10], [0,0,200,10]</answer>");
  REQUIRE(box.size() == 1);
  CHECK(box[0].kind == ConstraintKind::BoundingBox);

  auto format = violation_of("<think>t</think><answer>broken");
  REQUIRE(format.size() == 1);
  CHECK(format[0].kind == ConstraintKind::Format);
}

TEST_CASE("compound violations are all reported") {
  auto vocabulary = testutil::fixture_vocabulary();
  auto pkg = package_trajectory(make_trajectory(
      "img", testutil::fixture_turn1_text(),
      "<think>t</think><answer>1: pet, bicycle, [0,0,10,10], [0,0,200,10], "
      "2: ride, skateboard, [0,0,10,10], [0,0,10,10]</answer>",
      1));
  auto violations = validate_constraints(pkg, vocabulary, 128, 128);
  std::multiset<ConstraintKind> kinds;
  for (const auto& v : violations) kinds.insert(v.kind);
  CHECK(kinds == std::multiset<ConstraintKind>{ConstraintKind::VerbConstraint,
                                               ConstraintKind::BoundingBox,
                                               ConstraintKind::ClosedSetObject});
}

TEST_CASE("turn-1 detections are checked against the closed object set") {
  auto vocabulary = testutil::fixture_vocabulary();
  auto pkg = package_trajectory(make_trajectory(
      "img",
      "<think>t</think><answer>unicorn, [0,0,10,10] ; image_crop</answer>",
      testutil::fixture_turn2_text(), 1));
  auto violations = validate_constraints(pkg, vocabulary, 128, 128);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ConstraintKind::ClosedSetObject);
}

TEST_CASE("select_solvable drops all-miss images and keeps successful rollouts") {
  auto vocabulary = testutil::fixture_vocabulary();

  ImageRollouts all_miss;
  all_miss.image_id = "miss";
  all_miss.width = all_miss.height = 128;
  for (int i = 0; i < 16; ++i) {
    all_miss.trajectories.push_back(make_trajectory(
        "miss", testutil::fixture_turn1_text(), testutil::fixture_turn2_text(), 0));
  }

  ImageRollouts one_hit;
  one_hit.image_id = "hit";
  one_hit.width = one_hit.height = 128;
  for (int i = 0; i < 15; ++i) {
    one_hit.trajectories.push_back(make_trajectory(
        "hit", testutil::fixture_turn1_text(), testutil::fixture_turn2_text(), 0));
  }
  one_hit.trajectories.push_back(make_trajectory(
      "hit", testutil::fixture_turn1_text(), testutil::fixture_turn2_text(), 2));

  auto kept = select_solvable({all_miss, one_hit}, vocabulary);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].image_id == "hit");
  CHECK(kept[0].trajectories.size() == 1);
  CHECK(kept[0].trajectories[0].reward_breakdown->matching.tp == 2);
}

TEST_CASE("a solvable image whose only success violates a constraint is dropped") {
  auto vocabulary = testutil::fixture_vocabulary();
  ImageRollouts image;
  image.image_id = "tainted";
  image.width = image.height = 128;
  image.trajectories.push_back(make_trajectory(
      "tainted", testutil::fixture_turn1_text(),
      "<think>t</think><answer>1: pet, bicycle, [0,0,10,10], [0,0,10,10]</answer>", 1));
  CHECK(select_solvable({image}, vocabulary).empty());
}

TEST_CASE("candidate category is the first record's verb|object") {
  CHECK(candidate_category(good_trajectory()) == "ride|bicycle");
  agent::Trajectory empty;
  CHECK(candidate_category(empty).empty());
}

namespace {

std::vector<CorpusCandidate> balanced_pool(int categories, int per_category) {
  std::vector<CorpusCandidate> pool;
  for (int c = 0; c < categories; ++c) {
    for (int i = 0; i < per_category; ++i) {
      CorpusCandidate candidate;
      candidate.trajectory = package_trajectory(
          good_trajectory("img-" + std::to_string(c) + "-" + std::to_string(i)));
      candidate.category = "cat" + std::to_string(c);
      pool.push_back(std::move(candidate));
    }
  }
  return pool;
}

}  // namespace

TEST_CASE("split_corpora balances categories and keeps the corpora disjoint") {
  auto pool = balanced_pool(10, 10);
  AcceptAllJudge judge;
  auto split = split_corpora(pool, judge, {20, 30});

  CHECK(split.sft.size() == 20);
  CHECK(split.rl.size() == 30);
  CHECK(split.warnings.empty());
  for (const auto& [category, count] : split.sft_per_category) {
    (void)category;
    CHECK(count == 2);
  }
  for (const auto& [category, count] : split.rl_per_category) {
    (void)category;
    CHECK(count == 3);
  }

  std::set<std::string> sft_ids, rl_ids;
  for (const auto& t : split.sft) sft_ids.insert(t.image_id);
  for (const auto& t : split.rl) rl_ids.insert(t.image_id);
  CHECK(sft_ids.size() == split.sft.size());
  for (const auto& id : rl_ids) CHECK_FALSE(sft_ids.contains(id));
}

TEST_CASE("an uneven pool keeps the per-category spread at one or below") {
  std::vector<CorpusCandidate> pool = balanced_pool(3, 5);
  // one extra-rich category
  for (int i = 0; i < 20; ++i) {
    CorpusCandidate candidate;
    candidate.trajectory = package_trajectory(good_trajectory("rich-" + std::to_string(i)));
    candidate.category = "rich";
    pool.push_back(std::move(candidate));
  }
  AcceptAllJudge judge;
  auto split = split_corpora(pool, judge, {12, 0});
  int lo = 1 << 30, hi = 0;
  for (const auto& [category, count] : split.sft_per_category) {
    (void)category;
    lo = std::min(lo, count);
    hi = std::max(hi, count);
  }
  CHECK(hi - lo <= 1);
}

TEST_CASE("a judge that rejects everything empties SFT but not RL") {
  auto pool = balanced_pool(4, 3);
  RejectAllJudge judge;
  auto split = split_corpora(pool, judge, {6, 6});
  CHECK(split.sft.empty());
  CHECK(split.rl.size() == 6);
  REQUIRE_FALSE(split.warnings.empty());
  CHECK(split.warnings[0].find("sft") != std::string::npos);
}

TEST_CASE("targets exceeding supply produce partial corpora with warnings") {
  auto pool = balanced_pool(2, 2);
  AcceptAllJudge judge;
  auto split = split_corpora(pool, judge, {3, 10});
  CHECK(split.sft.size() == 3);
  CHECK(split.rl.size() == 1);
  CHECK(split.warnings.size() == 1);
}

TEST_CASE("rule-based judge accepts grounded, conformant trajectories") {
  auto vocabulary = testutil::fixture_vocabulary();
  std::map<std::string, std::pair<double, double>> dims = {{"fixture-image", {128, 128}}};
  RuleBasedJudge judge(vocabulary, dims);

  auto good = package_trajectory(good_trajectory());
  auto verdict = judge.review(good);
  CHECK(verdict.accept);
  CHECK(verdict.score == doctest::Approx(1.0));

  // think block never mentions the cup
  auto ungrounded = package_trajectory(make_trajectory(
      "fixture-image", testutil::fixture_turn1_text(),
      "<think>pair the person with the bicycle and the dog</think>"
      "<answer>1: ride, bicycle, [0,0,50,100], [30,40,90,100], "
      "2: hold, cup, [0,0,50,100], [60,60,70,70]</answer>",
      2));
  auto rejected = judge.review(ungrounded);
  CHECK_FALSE(rejected.accept);
  REQUIRE_FALSE(rejected.reasons.empty());

  // constraint violations are rejected too
  auto tainted = package_trajectory(make_trajectory(
      "fixture-image", testutil::fixture_turn1_text(),
      "<think>the bicycle</think><answer>1: pet, bicycle, [0,0,10,10], [0,0,10,10]</answer>",
      1));
  CHECK_FALSE(judge.review(tainted).accept);

  // unknown images cannot be validated
  auto unknown = package_trajectory(good_trajectory("other-image"));
  CHECK_FALSE(judge.review(unknown).accept);
}

TEST_CASE("rule-based judge is deterministic") {
  auto vocabulary = testutil::fixture_vocabulary();
  std::map<std::string, std::pair<double, double>> dims = {{"fixture-image", {128, 128}}};
  RuleBasedJudge judge(vocabulary, dims);
  auto pkg = package_trajectory(good_trajectory());
  auto a = judge.review(pkg);
  auto b = judge.review(pkg);
  CHECK(a.accept == b.accept);
  CHECK(a.score == b.score);
  CHECK(a.reasons == b.reasons);
}

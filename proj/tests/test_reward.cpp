#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "hoiagent/reward.hpp"
#include "support/test_util.hpp"

using namespace hoiagent;
using namespace hoiagent::reward;
using testutil::label;

namespace {

HOITriplet make_triplet(const std::string& verb, const std::string& object,
                        BBox human, BBox object_box) {
  return HOITriplet{label(verb), label(object), human, object_box, std::nullopt};
}

const ExactMatchProvider kExact;

AffinityMatrix random_binary_matrix(std::mt19937_64& rng, int max_side = 7) {
  std::uniform_int_distribution<int> side(0, max_side);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  AffinityMatrix m;
  m.n_pred = side(rng);
  m.n_gt = side(rng);
  const double p = density(rng);
  m.entries.assign(static_cast<size_t>(m.n_pred) * m.n_gt, 0);
  std::bernoulli_distribution bit(p);
  for (auto& e : m.entries) e = bit(rng) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("reward config defaults and validation") {
  RewardConfig cfg;
  CHECK(cfg.delta == 0.8);
  CHECK(cfg.eta == 0.5);
  CHECK(cfg.epsilon == 1e-6);
  CHECK(cfg.format_value == 0.5);
  CHECK(cfg.tool_value == 0.2);
  CHECK_NOTHROW(cfg.validate());

  RewardConfig bad = cfg;
  bad.delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("affinity identity case") {
  auto t = make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100});
  auto m = affinity(std::vector{t}, std::vector{t}, RewardConfig{}, kExact);
  REQUIRE(m.n_pred == 1);
  REQUIRE(m.n_gt == 1);
  CHECK(m.at(0, 0) == 1);
}

TEST_CASE("affinity IoU threshold is a strict inequality") {
  // human boxes overlap at exactly IoU 0.5
  auto pred = make_triplet("ride", "bicycle", BBox{0, 0, 10, 5}, BBox{30, 40, 90, 100});
  auto gt = make_triplet("ride", "bicycle", BBox{0, 0, 10, 10}, BBox{30, 40, 90, 100});
  REQUIRE(iou(pred.human_box, gt.human_box) == doctest::Approx(0.5));
  auto m = affinity(std::vector{pred}, std::vector{gt}, RewardConfig{}, kExact);
  CHECK(m.at(0, 0) == 0);
}

TEST_CASE("affinity similarity gate rejects unequal labels under exact matching") {
  auto pred = make_triplet("tennis racket swing", "bicycle", BBox{0, 0, 10, 10}, BBox{0, 0, 10, 10});
  auto gt = make_triplet("swing", "bicycle", BBox{0, 0, 10, 10}, BBox{0, 0, 10, 10});
  auto m = affinity(std::vector{pred}, std::vector{gt}, RewardConfig{}, kExact);
  CHECK(m.at(0, 0) == 0);
}

TEST_CASE("affinity of empty inputs") {
  std::vector<HOITriplet> empty;
  auto t = make_triplet("ride", "bicycle", BBox{0, 0, 1, 1}, BBox{0, 0, 1, 1});
  auto m = affinity(empty, std::vector{t}, RewardConfig{}, kExact);
  CHECK(m.n_pred == 0);
  CHECK(m.n_gt == 1);
  CHECK(m.entries.empty());
}

TEST_CASE("affinity equals the literal restatement of the match conditions") {
  auto rng = testutil::make_rng(31);
  const std::vector<std::string> verbs = {"ride", "hold"};
  const std::vector<std::string> objects = {"bicycle", "cup"};
  RewardConfig cfg;
  for (int c = 0; c < 200; ++c) {
    std::uniform_int_distribution<int> n(0, 4);
    std::vector<HOITriplet> pred, gt;
    for (int i = n(rng); i > 0; --i) pred.push_back(testutil::random_triplet(rng, verbs, objects));
    for (int i = n(rng); i > 0; --i) gt.push_back(testutil::random_triplet(rng, verbs, objects));
    auto m = affinity(pred, gt, cfg, kExact);
    for (int i = 0; i < m.n_pred; ++i) {
      for (int j = 0; j < m.n_gt; ++j) {
        CHECK(static_cast<bool>(m.at(i, j)) ==
              testutil::oracle_pair_matches(pred[i], gt[j], cfg.eta));
      }
    }
  }
}

TEST_CASE("optimal assignment on a 1x1 matrix") {
  AffinityMatrix m{1, 1, {1}};
  auto matching = optimal_assignment(m);
  CHECK(matching.tp == 1);
  REQUIRE(matching.pairs.size() == 1);
  CHECK(matching.pairs[0] == std::pair{0, 0});
}

TEST_CASE("optimal assignment refuses the greedy trap") {
  // picking (0,0) first would strand row 1; the optimum pairs (0,1),(1,0)
  AffinityMatrix m{2, 2, {1, 1, 1, 0}};
  auto matching = optimal_assignment(m);
  CHECK(matching.tp == 2);
}

TEST_CASE("assignment matches the exhaustive-permutation oracle") {
  auto rng = testutil::make_rng(32);
  for (int c = 0; c < 300; ++c) {
    auto m = random_binary_matrix(rng);
    auto matching = optimal_assignment(m);
    CHECK(matching.tp == testutil::oracle_max_tp(m));
    CHECK(matching.pairs.size() == static_cast<size_t>(std::min(m.n_pred, m.n_gt)));
    // one-to-one in both coordinates
    std::set<int> rows, cols;
    for (auto [i, j] : matching.pairs) {
      CHECK(rows.insert(i).second);
      CHECK(cols.insert(j).second);
    }
  }
}

TEST_CASE("hoi_reward on identical sets of three triplets") {
  std::vector<HOITriplet> triplets = {
      make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100}),
      make_triplet("hold", "cup", BBox{0, 0, 50, 100}, BBox{60, 60, 70, 70}),
      make_triplet("pet", "dog", BBox{10, 10, 60, 110}, BBox{80, 80, 99, 99}),
  };
  auto r = hoi_reward(triplets, triplets, RewardConfig{}, kExact);
  CHECK(r.matching.tp == 3);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.r_hoi == doctest::Approx(2.0 / (2.0 + 1e-6)).epsilon(1e-12));
}

TEST_CASE("hoi_reward with four predictions over two ground truths") {
  auto gt1 = make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100});
  auto gt2 = make_triplet("hold", "cup", BBox{0, 0, 50, 100}, BBox{60, 60, 70, 70});
  auto miss1 = make_triplet("pet", "dog", BBox{0, 0, 1, 1}, BBox{2, 2, 3, 3});
  auto miss2 = make_triplet("fly", "kite", BBox{0, 0, 1, 1}, BBox{2, 2, 3, 3});
  std::vector<HOITriplet> pred = {gt1, gt2, miss1, miss2};
  std::vector<HOITriplet> gt = {gt1, gt2};
  auto r = hoi_reward(pred, gt, RewardConfig{}, kExact);
  CHECK(r.matching.tp == 2);
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.r_hoi == doctest::Approx(2.0 * 0.5 * 1.0 / (1.5 + 1e-6)).epsilon(1e-12));
}

TEST_CASE("hoi_reward with an empty side is zero") {
  auto t = make_triplet("ride", "bicycle", BBox{0, 0, 1, 1}, BBox{0, 0, 1, 1});
  CHECK(hoi_reward({}, std::vector{t}, RewardConfig{}, kExact).r_hoi == 0.0);
  CHECK(hoi_reward(std::vector{t}, {}, RewardConfig{}, kExact).r_hoi == 0.0);
  auto both = hoi_reward({}, {}, RewardConfig{}, kExact);
  CHECK(both.r_hoi == 0.0);
  CHECK(both.precision == 0.0);
  CHECK(both.recall == 0.0);
}

TEST_CASE("hoi_reward equals the brute-force best-matching F1 on random scenes") {
  auto rng = testutil::make_rng(33);
  const std::vector<std::string> verbs = {"ride", "hold", "pet"};
  const std::vector<std::string> objects = {"bicycle", "cup", "dog"};
  RewardConfig cfg;
  for (int c = 0; c < 200; ++c) {
    std::uniform_int_distribution<int> n(0, 5);
    std::vector<HOITriplet> pred, gt;
    for (int i = n(rng); i > 0; --i) pred.push_back(testutil::random_triplet(rng, verbs, objects));
    for (int i = n(rng); i > 0; --i) gt.push_back(testutil::random_triplet(rng, verbs, objects));
    auto r = hoi_reward(pred, gt, cfg, kExact);
    CHECK(r.r_hoi == doctest::Approx(testutil::oracle_f1(pred, gt, cfg)).epsilon(1e-12));
  }
}

TEST_CASE("hoi_reward is invariant under permutation of either list") {
  auto rng = testutil::make_rng(34);
  const std::vector<std::string> verbs = {"ride", "hold"};
  const std::vector<std::string> objects = {"bicycle", "cup"};
  for (int c = 0; c < 100; ++c) {
    std::vector<HOITriplet> pred, gt;
    for (int i = 0; i < 4; ++i) {
      pred.push_back(testutil::random_triplet(rng, verbs, objects));
      gt.push_back(testutil::random_triplet(rng, verbs, objects));
    }
    const double base = hoi_reward(pred, gt, RewardConfig{}, kExact).r_hoi;
    std::shuffle(pred.begin(), pred.end(), rng);
    std::shuffle(gt.begin(), gt.end(), rng);
    CHECK(hoi_reward(pred, gt, RewardConfig{}, kExact).r_hoi ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("adding a matching prediction never decreases TP") {
  auto rng = testutil::make_rng(35);
  const std::vector<std::string> verbs = {"ride", "hold"};
  const std::vector<std::string> objects = {"bicycle", "cup"};
  for (int c = 0; c < 100; ++c) {
    std::vector<HOITriplet> pred, gt;
    for (int i = 0; i < 3; ++i) {
      pred.push_back(testutil::random_triplet(rng, verbs, objects));
      gt.push_back(testutil::random_triplet(rng, verbs, objects));
    }
    const int before = hoi_reward(pred, gt, RewardConfig{}, kExact).matching.tp;
    pred.push_back(gt[0]);  // exact copy of a ground truth
    const int after = hoi_reward(pred, gt, RewardConfig{}, kExact).matching.tp;
    CHECK(after >= before);
  }
}

TEST_CASE("duplicate identical predictions depress precision through N_p") {
  auto t = make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100});
  std::vector<HOITriplet> pred = {t, t, t};
  std::vector<HOITriplet> gt = {t};
  auto r = hoi_reward(pred, gt, RewardConfig{}, kExact);
  CHECK(r.matching.tp == 1);
  CHECK(r.precision == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("tool reward gate") {
  RewardConfig cfg;
  std::vector<ToolUse> one_success = {{protocol::ToolKind::image_crop, true}};
  std::vector<ToolUse> two_success = {{protocol::ToolKind::image_crop, true},
                                      {protocol::ToolKind::outpaint, true}};
  std::vector<ToolUse> all_failed = {{protocol::ToolKind::image_crop, false},
                                     {protocol::ToolKind::outpaint, false}};
  CHECK(tool_reward(one_success, 0.7, cfg) == doctest::Approx(0.2));
  CHECK(tool_reward(two_success, 0.0, cfg) == 0.0);
  CHECK(tool_reward(all_failed, 0.7, cfg) == 0.0);
  CHECK(tool_reward({}, 0.7, cfg) == 0.0);
  // flat per trajectory: two successes pay the same as one
  CHECK(tool_reward(two_success, 0.7, cfg) == doctest::Approx(0.2));
}

namespace {

std::string wrap(const std::string& think, const std::string& answer) {
  return "<think>" + think + "</think><answer>" + answer + "</answer>";
}

}  // namespace

TEST_CASE("total reward for a perfect trajectory") {
  std::vector<HOITriplet> gt = {
      make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100}),
      make_triplet("hold", "cup", BBox{0, 0, 50, 100}, BBox{60, 60, 70, 70}),
      make_triplet("pet", "dog", BBox{10, 10, 60, 110}, BBox{80, 80, 99, 99}),
  };
  const std::string turn1 = wrap("look", "person, [0,0,50,100] ; image_crop");
  const std::string turn2 = wrap(
      "reason",
      "1: ride, bicycle, [0,0,50,100], [30,40,90,100], "
      "2: hold, cup, [0,0,50,100], [60,60,70,70], "
      "3: pet, dog, [10,10,60,110], [80,80,99,99]");
  std::vector<ToolUse> tools = {{protocol::ToolKind::image_crop, true}};
  auto breakdown = total_reward(turn1, turn2, gt, tools, RewardConfig{}, kExact);
  const double r_hoi = 2.0 / (2.0 + 1e-6);
  CHECK(breakdown.r_hoi == doctest::Approx(r_hoi).epsilon(1e-12));
  CHECK(breakdown.r_format == 0.5);
  CHECK(breakdown.r_tool == 0.2);
  CHECK(breakdown.total == doctest::Approx(r_hoi + 0.7).epsilon(1e-12));
}

TEST_CASE("total reward of garbage text is zero") {
  auto t = make_triplet("ride", "bicycle", BBox{0, 0, 1, 1}, BBox{0, 0, 1, 1});
  auto breakdown = total_reward("garbage", "more garbage", std::vector{t}, {}, RewardConfig{}, kExact);
  CHECK(breakdown.total == 0.0);
  CHECK(breakdown.n_pred == 0);
}

TEST_CASE("a malformed think tag drops only the format component") {
  std::vector<HOITriplet> gt = {
      make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100})};
  const std::string turn1 = "<think>unclosed<answer>person, [0,0,50,100] ; image_crop</answer>";
  const std::string turn2 = wrap("r", "1: ride, bicycle, [0,0,50,100], [30,40,90,100]");
  std::vector<ToolUse> tools = {{protocol::ToolKind::image_crop, true}};
  auto breakdown = total_reward(turn1, turn2, gt, tools, RewardConfig{}, kExact);
  CHECK(breakdown.r_format == 0.0);
  CHECK(breakdown.r_hoi > 0.0);
  CHECK(breakdown.r_tool == doctest::Approx(0.2));
  CHECK(breakdown.total == doctest::Approx(breakdown.r_hoi + 0.2));
}

TEST_CASE("strict mode zeroes predictions on a partially malformed answer; salvage keeps them") {
  std::vector<HOITriplet> gt = {
      make_triplet("ride", "bicycle", BBox{0, 0, 50, 100}, BBox{30, 40, 90, 100})};
  const std::string turn1 = wrap("t", "person, [0,0,50,100] ; ");
  const std::string turn2 =
      wrap("t", "1: ride, bicycle, [0,0,50,100], [30,40,90,100], 2: broken record");

  auto strict = total_reward(turn1, turn2, gt, {}, RewardConfig{}, kExact);
  CHECK(strict.n_pred == 0);
  CHECK(strict.r_hoi == 0.0);
  CHECK(strict.r_format == 0.0);

  auto salvage = total_reward(turn1, turn2, gt, {}, RewardConfig{}, kExact,
                              AnswerParseMode::salvage);
  CHECK(salvage.n_pred == 1);
  CHECK(salvage.r_hoi > 0.9);
  CHECK(salvage.r_format == 0.0);  // format is judged on the strict grammar
}

TEST_CASE("gate soundness over fuzzed trajectories") {
  auto rng = testutil::make_rng(36);
  const std::vector<std::string> verbs = {"ride", "hold"};
  const std::vector<std::string> objects = {"bicycle", "cup"};
  RewardConfig cfg;
  std::uniform_int_distribution<int> n(0, 3);
  std::bernoulli_distribution coin(0.5);
  for (int c = 0; c < 200; ++c) {
    std::vector<HOITriplet> gt;
    for (int i = n(rng); i > 0; --i) gt.push_back(testutil::random_triplet(rng, verbs, objects));
    protocol::Turn2Answer answer;
    for (int i = n(rng); i > 0; --i) {
      auto t = coin(rng) && !gt.empty() ? gt[0] : testutil::random_triplet(rng, verbs, objects);
      answer.records.push_back(
          protocol::Turn2Record{i + 1, t.verb, t.object, t.human_box, t.object_box});
    }
    const std::string turn1 = coin(rng) ? wrap("t", "person, [0,0,50,100] ; image_crop")
                                        : "no tags at all";
    const std::string turn2 = wrap("t", protocol::render_turn2(answer));
    std::vector<ToolUse> tools;
    if (coin(rng)) tools.push_back({protocol::ToolKind::image_crop, coin(rng)});

    auto b = total_reward(turn1, turn2, gt, tools, cfg, kExact);
    const bool extra = b.total - b.r_hoi - b.r_format > 0.0;
    const bool gate_open = b.r_hoi > 0.0 &&
                           std::any_of(tools.begin(), tools.end(),
                                       [](const ToolUse& u) { return u.success; });
    CHECK(extra == gate_open);
    CHECK(b.r_hoi >= 0.0);
    CHECK(b.r_hoi < 1.0);
  }
}

namespace {

/// Vector client serving fixed unit vectors; counts remote calls.
class FakeVectorClient final : public VectorClient {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& labels) override {
    ++calls;
    std::vector<std::vector<double>> out;
    for (const auto& l : labels) {
      if (l == "boom") throw TransportError("vector service unreachable");
      if (l == "ride") out.push_back({1.0, 0.0});
      else if (l == "riding") out.push_back({0.83, std::sqrt(1.0 - 0.83 * 0.83)});
      else out.push_back({0.0, 1.0});
    }
    return out;
  }
  std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("exact provider example scores") {
  CHECK(kExact.score(label("ride"), label("ride")) == 1.0);
  CHECK(kExact.score(label("ride"), label("riding")) == 0.0);
}

TEST_CASE("embedding provider returns dot products of cached unit vectors") {
  auto client = std::make_shared<FakeVectorClient>();
  EmbeddingProvider provider(client);
  const double s = provider.score(label("ride"), label("riding"));
  CHECK(s == doctest::Approx(0.83));
  RewardConfig cfg;
  CHECK(s > cfg.delta);
  CHECK(provider.score(label("ride"), label("ride")) == 1.0);

  const int calls_before = client->calls;
  (void)provider.score(label("ride"), label("riding"));
  CHECK(client->calls == calls_before);  // served from cache
}

TEST_CASE("embedding provider surfaces transport failures instead of scoring 0") {
  auto client = std::make_shared<FakeVectorClient>();
  EmbeddingProvider provider(client);
  CHECK_THROWS_AS((void)provider.score(label("boom"), label("ride")), TransportError);
}

TEST_CASE("embedding provider is safe for concurrent scoring") {
  auto client = std::make_shared<FakeVectorClient>();
  EmbeddingProvider provider(client);
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        const double s = provider.score(label("ride"), label("riding"));
        if (std::abs(s - 0.83) > 1e-12) ++failures;
      }
    });
  }
  for (auto& t : workers) t.join();
  CHECK(failures == 0);
}

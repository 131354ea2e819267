// Command-line entry points: score, eval, rollout, filter, advantages.
//
// Exit codes: 0 success, 1 usage/config error, 2 data or format error,
// 3 backend failure. stdout carries only line-delimited JSON data; all
// diagnostics go to stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoiagent/artifacts.hpp"
#include "hoiagent/backends.hpp"
#include "hoiagent/datagen.hpp"
#include "hoiagent/eval.hpp"
#include "hoiagent/grpo.hpp"
#include "hoiagent/orchestrator.hpp"
#include "hoiagent/serialization.hpp"

namespace {

using nlohmann::json;
using namespace hoiagent;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string(what) + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": invalid JSON in '" + path + "': " + e.what());
  }
}

struct Config {
  reward::RewardConfig reward;
  agent::RolloutConfig rollout;
};

Config load_config(const std::string& path) {
  Config config;
  if (path.empty()) return config;
  json j = load_json_file(path, "config");
  try {
    if (j.contains("reward")) {
      const auto& r = j["reward"];
      config.reward.delta = r.value("delta", config.reward.delta);
      config.reward.eta = r.value("eta", config.reward.eta);
      config.reward.epsilon = r.value("epsilon", config.reward.epsilon);
      config.reward.format_value = r.value("format_value", config.reward.format_value);
      config.reward.tool_value = r.value("tool_value", config.reward.tool_value);
    }
    if (j.contains("rollout")) {
      const auto& r = j["rollout"];
      config.rollout.group_size = r.value("group_size", config.rollout.group_size);
      config.rollout.temperature = r.value("temperature", config.rollout.temperature);
      config.rollout.max_generation_tokens =
          r.value("max_generation_tokens", config.rollout.max_generation_tokens);
      config.rollout.tool_timeout_ms = r.value("tool_timeout_ms", config.rollout.tool_timeout_ms);
      config.rollout.retry_count = r.value("retry_count", config.rollout.retry_count);
      config.rollout.parallelism = r.value("parallelism", config.rollout.parallelism);
      const std::string mode = r.value("parse_mode", "strict");
      if (mode == "strict") {
        config.rollout.parse_mode = reward::AnswerParseMode::strict;
      } else if (mode == "salvage") {
        config.rollout.parse_mode = reward::AnswerParseMode::salvage;
      } else {
        throw std::invalid_argument("parse_mode must be 'strict' or 'salvage'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  config.rollout.reward = config.reward;
  config.reward.validate();
  config.rollout.validate();
  return config;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

bool is_endpoint(const std::string& value) {
  return value.rfind("http://", 0) == 0 || value.rfind("https://", 0) == 0;
}

std::unique_ptr<reward::SimilarityProvider> make_similarity(const std::string& endpoint) {
  if (endpoint.empty()) return std::make_unique<reward::ExactMatchProvider>();
  return std::make_unique<reward::EmbeddingProvider>(
      std::make_shared<agent::HttpVectorClient>(endpoint));
}

// ---------------------------------------------------------------------------
// score

int cmd_score(const std::string& gt_path, const std::string& pred_path,
              const std::string& config_path, const std::string& embed_endpoint) {
  const Config config = load_config(config_path);
  auto similarity = make_similarity(embed_endpoint);

  auto gt_records = read_image_records(gt_path);
  std::map<std::string, const ImageRecord*> gt_by_id;
  for (const auto& r : gt_records) gt_by_id[r.image_id] = &r;

  std::ifstream pred_in(pred_path);
  if (!pred_in) throw DataError("cannot open '" + pred_path + "'");
  auto pred_lines = read_jsonl<json>(pred_in, pred_path);

  struct Scored {
    std::string image_id;
    reward::RewardBreakdown breakdown;
  };
  std::vector<Scored> scored;
  std::map<std::string, bool> seen_image;

  for (size_t i = 0; i < pred_lines.size(); ++i) {
    const json& line = pred_lines[i];
    std::string image_id;
    reward::RewardBreakdown breakdown;
    try {
      if (line.contains("turn1_raw")) {  // trajectory record
        auto trajectory = line.get<agent::Trajectory>();
        image_id = trajectory.image_id;
        std::vector<HOITriplet> gt;
        if (auto it = gt_by_id.find(image_id); it != gt_by_id.end()) {
          gt = it->second->ground_truth;
        }
        std::vector<reward::ToolUse> uses;
        for (const auto& invocation : trajectory.tool_log) {
          uses.push_back({invocation.kind, invocation.success});
        }
        breakdown = reward::total_reward(trajectory.turn1_raw, trajectory.turn2_raw, gt, uses,
                                         config.reward, *similarity);
      } else {  // plain prediction record
        auto record = line.get<ImageRecord>();
        image_id = record.image_id;
        std::vector<HOITriplet> gt;
        if (auto it = gt_by_id.find(image_id); it != gt_by_id.end()) {
          gt = it->second->ground_truth;
        }
        auto hoi = reward::hoi_reward(record.predictions, gt, config.reward, *similarity);
        breakdown.r_hoi = hoi.r_hoi;
        breakdown.precision = hoi.precision;
        breakdown.recall = hoi.recall;
        breakdown.matching = hoi.matching;
        breakdown.total = hoi.r_hoi;
        breakdown.n_pred = static_cast<int>(record.predictions.size());
        breakdown.n_gt = static_cast<int>(gt.size());
      }
    } catch (const DataError& e) {
      throw DataError(pred_path + ": record " + std::to_string(i + 1) + ": " + e.what());
    }
    seen_image[image_id] = true;
    scored.push_back({image_id, std::move(breakdown)});
  }

  // ground-truth images with no prediction record score zero
  for (const auto& record : gt_records) {
    if (seen_image.contains(record.image_id)) continue;
    reward::RewardBreakdown breakdown;
    breakdown.n_gt = static_cast<int>(record.ground_truth.size());
    scored.push_back({record.image_id, std::move(breakdown)});
  }

  double sum_total = 0.0, sum_hoi = 0.0, sum_precision = 0.0, sum_recall = 0.0;
  int with_tp = 0;
  for (const auto& s : scored) {
    json out = {{"image_id", s.image_id}, {"reward", s.breakdown}};
    std::cout << out.dump() << "\n";
    sum_total += s.breakdown.total;
    sum_hoi += s.breakdown.r_hoi;
    sum_precision += s.breakdown.precision;
    sum_recall += s.breakdown.recall;
    if (s.breakdown.matching.tp > 0) ++with_tp;
  }
  const double n = scored.empty() ? 1.0 : static_cast<double>(scored.size());
  json aggregate = {{"aggregate",
                     {{"records", scored.size()},
                      {"mean_total", sum_total / n},
                      {"mean_r_hoi", sum_hoi / n},
                      {"mean_precision", sum_precision / n},
                      {"mean_recall", sum_recall / n},
                      {"records_with_tp", with_tp}}}};
  std::cout << aggregate.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& dataset_path, const std::string& pred_path, double eta) {
  json manifest = load_json_file(dataset_path, "dataset manifest");
  if (!manifest.contains("vocabulary") || !manifest.contains("images")) {
    throw DataError("dataset manifest needs 'vocabulary' and 'images' keys");
  }
  const auto base = std::filesystem::path(dataset_path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
  };

  eval::EvalDataset dataset{
      read_image_records(resolve(manifest.at("images").get<std::string>())),
      load_vocabulary(resolve(manifest.at("vocabulary").get<std::string>()))};

  if (!pred_path.empty()) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < dataset.images.size(); ++i) {
      index[dataset.images[i].image_id] = i;
      dataset.images[i].predictions.clear();
    }
    std::ifstream in(pred_path);
    if (!in) throw DataError("cannot open '" + pred_path + "'");
    auto lines = read_jsonl<json>(in, pred_path);
    for (const auto& line : lines) {
      const std::string image_id = line.at("image_id").get<std::string>();
      auto it = index.find(image_id);
      if (it == index.end()) {
        throw DataError(pred_path + ": unknown image_id '" + image_id + "'");
      }
      auto& image = dataset.images[it->second];
      image.predictions = line.value("predictions", std::vector<HOITriplet>{});
      validate_record(image);
    }
  }

  auto report = eval::evaluate(dataset, eta);
  json out = {{"eta", report.eta},
              {"split_map", report.split_map},
              {"split_category_counts", report.split_category_counts},
              {"evaluated_categories", report.evaluated_categories},
              {"skipped_categories", report.skipped_categories},
              {"ranking", "score desc, emission order on ties; unscored predictions rank 1.0"}};
  json per_category = json::array();
  for (const auto& [key, ap] : report.per_category_ap) {
    per_category.push_back({{"verb", key.verb.str()},
                            {"object", key.object.str()},
                            {"ap", ap},
                            {"gt", report.gt_counts.at(key)}});
  }
  out["per_category"] = per_category;
  std::cout << out.dump() << "\n";
  std::cerr << eval::render_report_table(report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rollout

int cmd_rollout(const std::string& images_path, const std::string& policy_spec,
                const std::string& tools_spec, int group_size, std::uint64_t seed,
                const std::string& out_path, const std::string& config_path,
                const std::string& artifacts_dir, const std::string& embed_endpoint) {
  Config config = load_config(config_path);
  if (group_size > 0) config.rollout.group_size = group_size;
  config.rollout.validate();

  json manifest = load_json_file(images_path, "images manifest");
  if (!manifest.contains("vocabulary") || !manifest.contains("images")) {
    throw DataError("images manifest needs 'vocabulary' and 'images' keys");
  }
  const auto base = std::filesystem::path(images_path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
  };
  auto vocabulary = load_vocabulary(resolve(manifest.at("vocabulary").get<std::string>()));

  std::vector<agent::RolloutQuery> queries;
  for (const auto& entry : manifest.at("images")) {
    agent::RolloutQuery query;
    query.image_id = entry.at("image_id").get<std::string>();
    query.image_ref = resolve(entry.at("path").get<std::string>());
    query.width = entry.at("width").get<double>();
    query.height = entry.at("height").get<double>();
    query.query_text = entry.value("query", "");
    query.ground_truth = entry.value("ground_truth", std::vector<HOITriplet>{});
    queries.push_back(std::move(query));
  }

  const std::string policy_value =
      policy_spec.empty() ? env_or("HOIAGENT_POLICY_ENDPOINT", "") : policy_spec;
  const std::string tools_value =
      tools_spec.empty() ? env_or("HOIAGENT_TOOLS_ENDPOINT", "") : tools_spec;
  if (policy_value.empty() || tools_value.empty()) {
    throw std::invalid_argument("--policy and --tools (or the endpoint environment "
                                "variables) are required");
  }
  for (const auto& value : {policy_value, tools_value}) {
    if (!is_endpoint(value) && !std::filesystem::exists(value)) {
      throw std::invalid_argument("mock script '" + value + "' does not exist");
    }
  }

  auto similarity = make_similarity(embed_endpoint);
  ArtifactStore store(artifacts_dir);

  std::unique_ptr<agent::ToolBackend> tools;
  if (is_endpoint(tools_value)) {
    tools = std::make_unique<agent::HttpToolBackend>(tools_value,
                                                     config.rollout.tool_timeout_ms);
  } else {
    tools = std::make_unique<agent::MockToolBackend>(
        agent::MockToolBackend::from_file(tools_value));
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::trunc);
    if (!out_file) throw DataError("cannot open '" + out_path + "' for writing");
    out = &out_file;
  }

  size_t transport_failures = 0, total_rollouts = 0;
  std::unique_ptr<agent::PolicyBackend> endpoint_policy;
  if (is_endpoint(policy_value)) {
    endpoint_policy = std::make_unique<agent::HttpPolicyBackend>(policy_value);
  }

  for (const auto& query : queries) {
    // per-image master seed, stable under manifest reordering
    const std::uint64_t master = agent::derive_seed(seed ^ fnv1a64(query.image_id), 0);
    std::unique_ptr<agent::PolicyBackend> mock_policy;
    agent::PolicyBackend* policy = endpoint_policy.get();
    if (!policy) {
      mock_policy = std::make_unique<agent::MockPolicyBackend>(
          agent::MockPolicyBackend::from_file(policy_value, master));
      policy = mock_policy.get();
    }
    auto result = agent::run_group(query, vocabulary, *policy, *tools, store,
                                   config.rollout, *similarity, master);
    for (const auto& trajectory : result.trajectories) {
      ++total_rollouts;
      if (trajectory.stage == agent::WorkflowStage::Failed &&
          trajectory.failure_reason.rfind("transport", 0) == 0) {
        ++transport_failures;
      }
      *out << json(trajectory).dump() << "\n";
    }
  }

  if (total_rollouts > 0 && transport_failures == total_rollouts) {
    std::cerr << "error: policy backend unreachable: every rollout failed on transport\n";
    return kExitBackend;
  }
  if (transport_failures > 0) {
    std::cerr << "warning: " << transport_failures << "/" << total_rollouts
              << " rollouts failed on transport\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// filter

int cmd_filter(const std::string& trajectories_path, const std::string& vocab_path,
               size_t sft_size, size_t rl_size, const std::string& sft_out,
               const std::string& rl_out, const std::string& manifest_out) {
  auto vocabulary = load_vocabulary(vocab_path);
  std::ifstream in(trajectories_path);
  if (!in) throw DataError("cannot open '" + trajectories_path + "'");
  auto trajectories = read_jsonl<agent::Trajectory>(in, trajectories_path);

  // group rollouts per image, preserving first-seen order
  std::vector<datagen::ImageRollouts> images;
  std::map<std::string, size_t> index;
  for (auto& trajectory : trajectories) {
    auto [it, inserted] = index.try_emplace(trajectory.image_id, images.size());
    if (inserted) {
      datagen::ImageRollouts image;
      image.image_id = trajectory.image_id;
      image.width = trajectory.width;
      image.height = trajectory.height;
      images.push_back(std::move(image));
    }
    images[it->second].trajectories.push_back(std::move(trajectory));
  }

  std::map<std::string, std::pair<double, double>> dims;
  for (const auto& image : images) dims[image.image_id] = {image.width, image.height};

  auto kept = datagen::select_solvable(images, vocabulary);
  std::vector<datagen::CorpusCandidate> candidates;
  for (const auto& image : kept) {
    for (const auto& trajectory : image.trajectories) {
      datagen::CorpusCandidate candidate;
      candidate.trajectory = datagen::package_trajectory(trajectory);
      candidate.category = datagen::candidate_category(trajectory);
      candidates.push_back(std::move(candidate));
    }
  }

  datagen::RuleBasedJudge judge(vocabulary, dims);
  auto split = datagen::split_corpora(candidates, judge, {sft_size, rl_size});

  auto write_corpus = [](const std::string& path,
                         const std::vector<datagen::PackagedTrajectory>& corpus) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& t : corpus) out << json(t).dump() << "\n";
  };
  write_corpus(sft_out, split.sft);
  write_corpus(rl_out, split.rl);

  json manifest = {{"images_in", images.size()},
                   {"images_solvable", kept.size()},
                   {"candidates", candidates.size()},
                   {"sft_total", split.sft.size()},
                   {"rl_total", split.rl.size()},
                   {"sft_per_category", split.sft_per_category},
                   {"rl_per_category", split.rl_per_category},
                   {"warnings", split.warnings}};
  {
    std::ofstream out(manifest_out, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + manifest_out + "' for writing");
    out << manifest.dump(2) << "\n";
  }
  std::cout << manifest.dump() << "\n";
  for (const auto& warning : split.warnings) std::cerr << "warning: " << warning << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// advantages

int cmd_advantages(const std::string& rewards_path, double beta) {
  std::ifstream in(rewards_path);
  if (!in) throw DataError("cannot open '" + rewards_path + "'");
  auto lines = read_jsonl<json>(in, rewards_path);

  struct Entry {
    json record;
    double reward = 0.0;
    std::optional<grpo::LogprobTrace> trace;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Entry>> groups;
  for (const auto& line : lines) {
    Entry entry;
    entry.record = line;
    const std::string query_id = line.at("query_id").get<std::string>();
    entry.reward = line.at("reward").get<double>();
    if (line.contains("logp_theta") && line.contains("logp_old") && line.contains("logp_ref")) {
      grpo::LogprobTrace trace;
      trace.theta = line.at("logp_theta").get<std::vector<double>>();
      trace.old_policy = line.at("logp_old").get<std::vector<double>>();
      trace.reference = line.at("logp_ref").get<std::vector<double>>();
      entry.trace = std::move(trace);
    }
    if (!groups.contains(query_id)) order.push_back(query_id);
    groups[query_id].push_back(std::move(entry));
  }

  for (const auto& query_id : order) {
    auto& entries = groups[query_id];
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.record.value("rollout_index", 0) < b.record.value("rollout_index", 0);
    });
    if (entries.size() < 2) {
      throw DataError("query '" + query_id + "' has a group of " +
                      std::to_string(entries.size()) + " rollouts; need G >= 2");
    }
    std::vector<double> rewards;
    for (const auto& e : entries) rewards.push_back(e.reward);

    const bool with_traces =
        std::all_of(entries.begin(), entries.end(),
                    [](const Entry& e) { return e.trace.has_value(); });
    std::vector<double> advantages;
    std::optional<grpo::GroupAdvantages> diagnostics;
    if (with_traces) {
      grpo::RolloutGroup group;
      group.query_id = query_id;
      group.rewards = rewards;
      for (auto& e : entries) group.traces.push_back(std::move(*e.trace));
      grpo::GrpoOptions options;
      options.beta = beta;
      try {
        diagnostics = grpo::grpo_objective(group, options);
      } catch (const std::invalid_argument& e) {
        throw DataError("query '" + query_id + "': " + e.what());
      }
      advantages = diagnostics->advantages;
    } else {
      try {
        advantages = grpo::advantages(rewards);
      } catch (const std::invalid_argument& e) {
        throw DataError("query '" + query_id + "': " + e.what());
      }
    }

    for (size_t i = 0; i < entries.size(); ++i) {
      json out = {{"query_id", query_id},
                  {"rollout_index", entries[i].record.value("rollout_index", static_cast<int>(i))},
                  {"reward", rewards[i]},
                  {"advantage", advantages[i]},
                  {"beta", beta}};
      if (diagnostics) {
        out["kl"] = diagnostics->kl_per_rollout[i];
        out["objective_value"] = diagnostics->objective_value;
      }
      std::cout << out.dump() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tool-augmented HOI agent pipelines: scoring, evaluation, rollouts, "
               "corpus filtering and group advantages"};
  app.require_subcommand(1);

  std::string gt_path, pred_path, config_path, embed_endpoint;
  auto* score = app.add_subcommand("score", "Composite rewards for predictions or trajectories");
  score->add_option("--gt", gt_path, "ground-truth ImageRecord JSONL")->required();
  score->add_option("--pred", pred_path, "predictions or trajectories JSONL")->required();
  score->add_option("--config", config_path, "JSON config file");
  score->add_option("--embedding-endpoint", embed_endpoint,
                    "similarity service base URL (default: exact match)");

  std::string dataset_path, eval_pred_path;
  double eta = 0.5;
  auto* eval_cmd = app.add_subcommand("eval", "Open-vocabulary mAP evaluation");
  eval_cmd->add_option("--dataset", dataset_path,
                       "dataset manifest JSON {vocabulary, images}")->required();
  eval_cmd->add_option("--pred", eval_pred_path,
                       "predictions JSONL keyed by image_id (default: embedded)");
  eval_cmd->add_option("--eta", eta, "IoU threshold (default 0.5)");

  std::string images_path, policy_spec, tools_spec, out_path, artifacts_dir = "artifacts";
  int group_size = 0;
  std::uint64_t seed = 1234;
  auto* rollout = app.add_subcommand("rollout", "Two-turn rollout groups over an image manifest");
  rollout->add_option("--images", images_path, "images manifest JSON")->required();
  rollout->add_option("--policy", policy_spec,
                      "policy endpoint URL or mock script path "
                      "(env HOIAGENT_POLICY_ENDPOINT)");
  rollout->add_option("--tools", tools_spec,
                      "tool endpoint URL or mock script path (env HOIAGENT_TOOLS_ENDPOINT)");
  rollout->add_option("--group-size", group_size, "rollouts per image (default from config: 4)");
  rollout->add_option("--seed", seed, "master seed (default 1234)");
  rollout->add_option("--out", out_path, "output trajectories file (default stdout)");
  rollout->add_option("--config", config_path, "JSON config file");
  rollout->add_option("--artifacts", artifacts_dir, "artifact store directory");
  rollout->add_option("--embedding-endpoint", embed_endpoint,
                      "similarity service base URL (default: exact match)");

  std::string trajectories_path, vocab_path, sft_out = "sft.jsonl", rl_out = "rl.jsonl",
              manifest_out = "corpus_manifest.json";
  size_t sft_size = 6000, rl_size = 8000;
  auto* filter = app.add_subcommand("filter", "Solvability selection, judging and corpus split");
  filter->add_option("--trajectories", trajectories_path, "trajectories JSONL")->required();
  filter->add_option("--vocab", vocab_path, "vocabulary JSON")->required();
  filter->add_option("--sft-size", sft_size, "SFT corpus target (default 6000)");
  filter->add_option("--rl-size", rl_size, "RL corpus target (default 8000)");
  filter->add_option("--sft-out", sft_out, "SFT corpus output path");
  filter->add_option("--rl-out", rl_out, "RL corpus output path");
  filter->add_option("--manifest-out", manifest_out, "manifest output path");

  std::string rewards_path;
  double beta = 0.04;
  auto* advantages = app.add_subcommand("advantages", "Group-normalized advantages and KL");
  advantages->add_option("--rewards", rewards_path, "rewards JSONL")->required();
  advantages->add_option("--beta", beta, "KL coefficient (default 0.04)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score->parsed()) return cmd_score(gt_path, pred_path, config_path, embed_endpoint);
    if (eval_cmd->parsed()) return cmd_eval(dataset_path, eval_pred_path, eta);
    if (rollout->parsed()) {
      return cmd_rollout(images_path, policy_spec, tools_spec, group_size, seed, out_path,
                         config_path, artifacts_dir, embed_endpoint);
    }
    if (filter->parsed()) {
      return cmd_filter(trajectories_path, vocab_path, sft_size, rl_size, sft_out, rl_out,
                        manifest_out);
    }
    if (advantages->parsed()) return cmd_advantages(rewards_path, beta);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

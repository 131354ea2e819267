#include "hoiagent/backends.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "hoiagent/artifacts.hpp"

namespace hoiagent::agent {

namespace {

nlohmann::json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string(what) + ": cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(what) + ": invalid JSON in '" + path + "': " + e.what());
  }
}

nlohmann::json post_json(const std::string& base_url, const std::string& route,
                         const nlohmann::json& body, int timeout_ms) {
  httplib::Client client(base_url);
  client.set_connection_timeout(0, timeout_ms * 1000);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  auto result = client.Post(route, body.dump(), "application/json");
  if (!result) {
    throw TransportError("POST " + base_url + route + " failed: " +
                         httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw TransportError("POST " + base_url + route + " returned status " +
                         std::to_string(result->status));
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("POST " + base_url + route + " returned malformed JSON: " + e.what());
  }
}

}  // namespace

nlohmann::json to_wire(const GenerationRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : m.parts) {
      parts.push_back({{"kind", p.kind}, {"value", p.value}});
    }
    messages.push_back({{"role", m.role}, {"parts", parts}});
  }
  return nlohmann::json{
      {"messages", messages},
      {"sampling",
       {{"temperature", request.sampling.temperature},
        {"max_tokens", request.sampling.max_tokens},
        {"seed", request.sampling.seed}}},
      {"want_logprobs", request.want_logprobs}};
}

GenerationRequest generation_request_from_wire(const nlohmann::json& j) {
  GenerationRequest request;
  for (const auto& m : j.at("messages")) {
    Message message;
    message.role = m.at("role").get<std::string>();
    for (const auto& p : m.at("parts")) {
      message.parts.push_back({p.at("kind").get<std::string>(),
                               p.at("value").get<std::string>()});
    }
    request.messages.push_back(std::move(message));
  }
  const auto& s = j.at("sampling");
  request.sampling.temperature = s.at("temperature").get<double>();
  request.sampling.max_tokens = s.at("max_tokens").get<int>();
  request.sampling.seed = s.at("seed").get<std::uint64_t>();
  request.want_logprobs = j.value("want_logprobs", false);
  return request;
}

nlohmann::json to_wire(const ToolRequest& request) {
  return nlohmann::json{
      {"tool", request.tool}, {"args", request.args}, {"images", request.images}};
}

ToolRequest tool_request_from_wire(const nlohmann::json& j) {
  ToolRequest request;
  request.tool = j.at("tool").get<std::string>();
  request.args = j.value("args", nlohmann::json::object());
  request.images = j.value("images", std::vector<std::string>{});
  return request;
}

std::string request_fingerprint(const GenerationRequest& request) {
  char out[24];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_wire(request).dump())));
  return out;
}

std::uint64_t derive_seed(std::uint64_t master_seed, int rollout_index) {
  // splitmix64 over the master seed and the rollout position
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(rollout_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MockPolicyBackend::MockPolicyBackend(nlohmann::json script, std::uint64_t master_seed,
                                     int max_rollouts) {
  fingerprint_map_ = script.value("by_fingerprint", nlohmann::json::object());
  for (const auto& r : script.value("rollouts", nlohmann::json::array())) {
    rollouts_.push_back(RolloutScript{r.value("turn1", ""), r.value("turn2", "")});
  }
  score_logprobs_ = script.value("score_logprobs", std::vector<double>{});
  for (int i = 0; i < max_rollouts; ++i) {
    seed_to_rollout_[derive_seed(master_seed, i)] = i;
  }
}

MockPolicyBackend MockPolicyBackend::from_file(const std::string& path,
                                               std::uint64_t master_seed) {
  return MockPolicyBackend(load_json_file(path, "mock policy script"), master_seed);
}

GenerationResult MockPolicyBackend::generate(const GenerationRequest& request) {
  if (!fingerprint_map_.empty()) {
    auto it = fingerprint_map_.find(request_fingerprint(request));
    if (it != fingerprint_map_.end()) {
      GenerationResult result;
      result.text = it->value("text", "");
      if (it->contains("logprobs")) {
        result.logprobs = it->at("logprobs").get<std::vector<double>>();
      }
      return result;
    }
  }
  if (rollouts_.empty()) {
    throw DataError("mock policy script has no matching fingerprint and no rollouts");
  }
  int rollout_index = 0;
  if (auto it = seed_to_rollout_.find(request.sampling.seed); it != seed_to_rollout_.end()) {
    rollout_index = it->second;
  }
  int call_index = 0;
  {
    std::lock_guard lock(mutex_);
    call_index = calls_per_seed_[request.sampling.seed]++;
  }
  const auto& script = rollouts_[static_cast<size_t>(rollout_index) % rollouts_.size()];
  GenerationResult result;
  result.text = call_index == 0 ? script.turn1 : script.turn2;
  if (request.want_logprobs) {
    result.logprobs = std::vector<double>(result.text.empty() ? 1 : 8, -1.0);
  }
  return result;
}

std::vector<double> MockPolicyBackend::score(const std::vector<MessagePart>&,
                                             const std::string& completion_text) {
  if (!score_logprobs_.empty()) return score_logprobs_;
  // one pseudo-token per whitespace-separated word, fixed mass
  std::istringstream words(completion_text);
  size_t count = 0;
  std::string w;
  while (words >> w) ++count;
  return std::vector<double>(std::max<size_t>(count, 1), -1.0);
}

MockToolBackend::MockToolBackend(nlohmann::json script) : script_(std::move(script)) {}

MockToolBackend MockToolBackend::from_file(const std::string& path) {
  return MockToolBackend(load_json_file(path, "mock tool script"));
}

ToolResponse MockToolBackend::execute(const ToolRequest& request) {
  nlohmann::json entry;
  const auto tools = script_.value("tools", nlohmann::json::object());
  if (auto it = tools.find(request.tool); it != tools.end()) {
    entry = *it;
  } else {
    entry = script_.value("default", nlohmann::json{{"success", false}});
  }
  if (entry.contains("error")) {
    throw TransportError("mock tool '" + request.tool +
                         "': " + entry.at("error").get<std::string>());
  }
  ToolResponse response;
  response.success = entry.value("success", false);
  response.texts = entry.value("texts", std::vector<std::string>{});
  response.images = entry.value("images", std::vector<std::string>{});
  response.latency_ms = entry.value("latency_ms", 0.0);
  return response;
}

HttpPolicyBackend::HttpPolicyBackend(std::string base_url, int timeout_ms)
    : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

GenerationResult HttpPolicyBackend::generate(const GenerationRequest& request) {
  auto j = post_json(base_url_, "/generate", to_wire(request), timeout_ms_);
  GenerationResult result;
  result.text = j.value("text", "");
  if (j.contains("logprobs") && !j["logprobs"].is_null()) {
    result.logprobs = j["logprobs"].get<std::vector<double>>();
  }
  return result;
}

std::vector<double> HttpPolicyBackend::score(const std::vector<MessagePart>& prompt_parts,
                                             const std::string& completion_text) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : prompt_parts) parts.push_back({{"kind", p.kind}, {"value", p.value}});
  auto j = post_json(base_url_, "/score",
                     {{"prompt_parts", parts}, {"completion_text", completion_text}},
                     timeout_ms_);
  try {
    return j.at("logprobs").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed /score response: ") + e.what());
  }
}

HttpToolBackend::HttpToolBackend(std::string base_url, int timeout_ms)
    : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

ToolResponse HttpToolBackend::execute(const ToolRequest& request) {
  auto j = post_json(base_url_, "/execute", to_wire(request), timeout_ms_);
  ToolResponse response;
  response.success = j.value("success", false);
  response.texts = j.value("texts", std::vector<std::string>{});
  response.images = j.value("images", std::vector<std::string>{});
  response.latency_ms = j.value("latency_ms", 0.0);
  return response;
}

HttpVectorClient::HttpVectorClient(std::string base_url, int timeout_ms)
    : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

std::vector<std::vector<double>> HttpVectorClient::embed(
    const std::vector<std::string>& labels) {
  auto j = post_json(base_url_, "/embed", {{"labels", labels}}, timeout_ms_);
  try {
    return j.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed /embed response: ") + e.what());
  }
}

}  // namespace hoiagent::agent

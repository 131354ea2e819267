#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoiagent/errors.hpp"
#include "hoiagent/reward.hpp"

namespace hoiagent::agent {

/// One message part on the policy wire. kind is "text" or "image"; image
/// values are content-addressed file references locally, or inline base64
/// bytes (prefixed "b64:") when crossing a remote boundary.
struct MessagePart {
  std::string kind;
  std::string value;

  bool operator==(const MessagePart&) const = default;
};

struct Message {
  std::string role;
  std::vector<MessagePart> parts;

  bool operator==(const Message&) const = default;
};

struct SamplingParams {
  double temperature = 0.8;
  int max_tokens = 4096;
  std::uint64_t seed = 0;

  bool operator==(const SamplingParams&) const = default;
};

struct GenerationRequest {
  std::vector<Message> messages;
  SamplingParams sampling;
  bool want_logprobs = false;
};

struct GenerationResult {
  std::string text;
  std::optional<std::vector<double>> logprobs;
};

/// Generator + scorer pair over an opaque policy model. Implementations
/// must tolerate concurrent independent requests and be deterministic for
/// a fixed seed when the underlying model supports seeding.
class PolicyBackend {
 public:
  virtual ~PolicyBackend() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
  virtual std::vector<double> score(const std::vector<MessagePart>& prompt_parts,
                                    const std::string& completion_text) = 0;
};

struct ToolRequest {
  std::string tool;
  nlohmann::json args = nlohmann::json::object();
  std::vector<std::string> images;
};

struct ToolResponse {
  std::vector<std::string> texts;
  std::vector<std::string> images;
  bool success = false;
  double latency_ms = 0.0;
};

class ToolBackend {
 public:
  virtual ~ToolBackend() = default;
  virtual ToolResponse execute(const ToolRequest& request) = 0;
};

// Wire encoding of the request/response JSON protocol.
nlohmann::json to_wire(const GenerationRequest& request);
GenerationRequest generation_request_from_wire(const nlohmann::json& j);
nlohmann::json to_wire(const ToolRequest& request);
ToolRequest tool_request_from_wire(const nlohmann::json& j);

/// Stable hex fingerprint of a generation request (canonical wire JSON,
/// FNV-1a 64). Mock scripts may key canned responses on it.
std::string request_fingerprint(const GenerationRequest& request);

/// Sequence-index seed schedule shared by run_group and the mocks: the
/// i-th rollout of a group samples with derive_seed(master_seed, i).
std::uint64_t derive_seed(std::uint64_t master_seed, int rollout_index);

/// Scripted policy backend for tests and offline pipelines.
///
/// Script document:
///   {
///     "rollouts": [ {"turn1": "...", "turn2": "..."} , ... ],
///     "by_fingerprint": { "<hex>": {"text": "...", "logprobs": [...] } },
///     "score_logprobs": [ ... ]            // optional, for score()
///   }
///
/// Lookup order: fingerprint map first, then the rollout sequence. The
/// rollout index is recovered from the request seed via the shared seed
/// schedule (falling back to index 0 for unknown seeds), and the per-seed
/// call count selects turn1 / turn2, so replies are deterministic even
/// when a group runs concurrently. Sequences shorter than the group wrap
/// around.
class MockPolicyBackend final : public PolicyBackend {
 public:
  MockPolicyBackend(nlohmann::json script, std::uint64_t master_seed,
                    int max_rollouts = 64);
  static MockPolicyBackend from_file(const std::string& path, std::uint64_t master_seed);

  GenerationResult generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::vector<MessagePart>& prompt_parts,
                            const std::string& completion_text) override;

 private:
  struct RolloutScript {
    std::string turn1;
    std::string turn2;
  };
  nlohmann::json fingerprint_map_;
  std::vector<RolloutScript> rollouts_;
  std::vector<double> score_logprobs_;
  std::map<std::uint64_t, int> seed_to_rollout_;
  std::mutex mutex_;
  std::map<std::uint64_t, int> calls_per_seed_;
};

/// Scripted tool backend. Script document:
///   {
///     "tools": {
///       "outpaint": {"success": true, "texts": [...], "images": [...]},
///       "viewpoint_transform": {"error": "simulated timeout"}
///     },
///     "default": {"success": false}
///   }
/// An entry with "error" throws TransportError to exercise fault paths.
class MockToolBackend final : public ToolBackend {
 public:
  explicit MockToolBackend(nlohmann::json script);
  static MockToolBackend from_file(const std::string& path);

  ToolResponse execute(const ToolRequest& request) override;

 private:
  nlohmann::json script_;
};

/// HTTP policy backend: POST {base}/generate and {base}/score.
class HttpPolicyBackend final : public PolicyBackend {
 public:
  explicit HttpPolicyBackend(std::string base_url, int timeout_ms = 30000);
  GenerationResult generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::vector<MessagePart>& prompt_parts,
                            const std::string& completion_text) override;

 private:
  std::string base_url_;
  int timeout_ms_;
};

/// HTTP tool backend: POST {base}/execute.
class HttpToolBackend final : public ToolBackend {
 public:
  explicit HttpToolBackend(std::string base_url, int timeout_ms = 30000);
  ToolResponse execute(const ToolRequest& request) override;

 private:
  std::string base_url_;
  int timeout_ms_;
};

/// Embedding-service client over the same JSON wire:
/// POST {base}/embed with {"labels": [...]} -> {"vectors": [[...]]}.
class HttpVectorClient final : public reward::VectorClient {
 public:
  explicit HttpVectorClient(std::string base_url, int timeout_ms = 30000);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& labels) override;

 private:
  std::string base_url_;
  int timeout_ms_;
};

}  // namespace hoiagent::agent

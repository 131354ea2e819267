#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace hoiagent {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(std::string_view text);

/// Append-only, content-addressed file store for tool artifacts. A blob is
/// named by the hex digest of its bytes, so identical content maps to the
/// same reference and concurrent writers are safe (write-to-temp + rename,
/// existing entries are never rewritten).
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  /// Stores the bytes and returns the artifact path.
  std::string put(std::span<const std::uint8_t> bytes, std::string_view extension) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace hoiagent

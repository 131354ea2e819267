#include "hoiagent/artifacts.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

#include "hoiagent/errors.hpp"

namespace hoiagent {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::uint64_t fnv1a64(std::string_view text) {
  return fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ArtifactStore::ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw DataError("cannot create artifact store at '" + root_.string() + "'");
}

std::string ArtifactStore::put(std::span<const std::uint8_t> bytes,
                               std::string_view extension) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  auto target = root_ / (std::string(name) + "." + std::string(extension));
  if (std::filesystem::exists(target)) return target.string();

  auto temp = target;
  temp += ".tmp" + std::to_string(::getpid()) + "-" +
          std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write artifact '" + temp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    // a concurrent writer won the race; the content is identical
    std::filesystem::remove(temp, ec);
    if (!std::filesystem::exists(target)) {
      throw DataError("cannot store artifact '" + target.string() + "'");
    }
  }
  return target.string();
}

}  // namespace hoiagent

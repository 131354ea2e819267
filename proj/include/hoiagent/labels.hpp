#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace hoiagent {

/// A verb or object label in canonical form: lowercase, underscores mapped
/// to spaces, interior whitespace collapsed to single spaces, edges trimmed.
/// Construct through parse() so the canonical-form invariant always holds.
class EntityLabel {
 public:
  EntityLabel() = default;

  /// Normalizes `raw`; returns nullopt when nothing is left after
  /// normalization.
  static std::optional<EntityLabel> parse(std::string_view raw);

  const std::string& str() const { return text_; }
  bool empty() const { return text_.empty(); }

  auto operator<=>(const EntityLabel&) const = default;

 private:
  explicit EntityLabel(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

/// Raw normalization rule behind EntityLabel::parse. Idempotent.
std::string normalize_label(std::string_view raw);

}  // namespace hoiagent

template <>
struct std::hash<hoiagent::EntityLabel> {
  size_t operator()(const hoiagent::EntityLabel& l) const {
    return std::hash<std::string>{}(l.str());
  }
};

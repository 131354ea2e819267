#include "hoiagent/labels.hpp"

#include <cctype>

namespace hoiagent {

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == '_') c = ' ';
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::optional<EntityLabel> EntityLabel::parse(std::string_view raw) {
  std::string text = normalize_label(raw);
  if (text.empty()) return std::nullopt;
  return EntityLabel(std::move(text));
}

}  // namespace hoiagent

#include "hoiagent/vocabulary.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hoiagent {

namespace {

EntityLabel require_label(const std::string& raw, const char* where) {
  auto label = EntityLabel::parse(raw);
  if (!label) {
    throw DataError(std::string(where) + ": label '" + raw +
                    "' is empty after normalization");
  }
  return *label;
}

}  // namespace

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::seen: return "seen";
    case SplitTag::unseen: return "unseen";
    case SplitTag::rare: return "rare";
    case SplitTag::non_rare: return "non_rare";
  }
  return "seen";
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "seen") return SplitTag::seen;
  if (s == "unseen") return SplitTag::unseen;
  if (s == "rare") return SplitTag::rare;
  if (s == "non_rare") return SplitTag::non_rare;
  throw DataError("unknown split tag '" + s + "'");
}

Vocabulary Vocabulary::create(std::set<EntityLabel> objects,
                              std::set<EntityLabel> verbs,
                              std::map<EntityLabel, std::set<EntityLabel>> object_to_verbs,
                              std::map<CategoryKey, SplitTag> category_split) {
  if (objects.empty()) throw DataError("vocabulary: objects set is empty");
  if (verbs.empty()) throw DataError("vocabulary: verbs set is empty");
  for (const auto& [object, allowed] : object_to_verbs) {
    if (!objects.contains(object)) {
      throw DataError("object_to_verbs: object '" + object.str() +
                      "' is not in the objects set");
    }
    for (const auto& verb : allowed) {
      if (!verbs.contains(verb)) {
        throw DataError("object_to_verbs: verb '" + verb.str() +
                        "' under object '" + object.str() +
                        "' is not in the verbs set");
      }
    }
  }
  for (const auto& [key, tag] : category_split) {
    (void)tag;
    if (!objects.contains(key.object)) {
      throw DataError("category_split: object '" + key.object.str() +
                      "' is not in the objects set");
    }
    auto it = object_to_verbs.find(key.object);
    if (it == object_to_verbs.end() || !it->second.contains(key.verb)) {
      throw DataError("category_split: verb '" + key.verb.str() +
                      "' is not a valid action for object '" +
                      key.object.str() + "'");
    }
  }
  Vocabulary v;
  v.objects_ = std::move(objects);
  v.verbs_ = std::move(verbs);
  v.object_to_verbs_ = std::move(object_to_verbs);
  v.category_split_ = std::move(category_split);
  return v;
}

bool Vocabulary::verb_allowed(const EntityLabel& object, const EntityLabel& verb) const {
  auto it = object_to_verbs_.find(object);
  return it != object_to_verbs_.end() && it->second.contains(verb);
}

std::optional<SplitTag> Vocabulary::split_of(const CategoryKey& key) const {
  auto it = category_split_.find(key);
  if (it == category_split_.end()) return std::nullopt;
  return it->second;
}

Vocabulary parse_vocabulary(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("vocabulary: invalid JSON: ") + e.what());
  }
  for (const char* key : {"objects", "verbs", "object_to_verbs", "category_split"}) {
    if (!doc.contains(key)) {
      throw DataError(std::string("vocabulary: missing key '") + key + "'");
    }
  }

  std::set<EntityLabel> objects;
  for (const auto& item : doc.at("objects")) {
    auto label = require_label(item.get<std::string>(), "objects");
    if (!objects.insert(label).second) {
      throw DataError("objects: duplicate entry '" + label.str() + "'");
    }
  }
  std::set<EntityLabel> verbs;
  for (const auto& item : doc.at("verbs")) {
    auto label = require_label(item.get<std::string>(), "verbs");
    if (!verbs.insert(label).second) {
      throw DataError("verbs: duplicate entry '" + label.str() + "'");
    }
  }

  std::map<EntityLabel, std::set<EntityLabel>> object_to_verbs;
  for (const auto& [raw_object, verb_list] : doc.at("object_to_verbs").items()) {
    auto object = require_label(raw_object, "object_to_verbs");
    auto& allowed = object_to_verbs[object];
    for (const auto& raw_verb : verb_list) {
      auto verb = require_label(raw_verb.get<std::string>(), "object_to_verbs");
      if (!allowed.insert(verb).second) {
        throw DataError("object_to_verbs: duplicate verb '" + verb.str() +
                        "' under object '" + object.str() + "'");
      }
    }
  }

  std::map<CategoryKey, SplitTag> category_split;
  for (const auto& [raw_key, raw_tag] : doc.at("category_split").items()) {
    auto sep = raw_key.find('|');
    if (sep == std::string::npos) {
      throw DataError("category_split: key '" + raw_key +
                      "' is not of the form 'verb|object'");
    }
    CategoryKey key{require_label(raw_key.substr(0, sep), "category_split"),
                    require_label(raw_key.substr(sep + 1), "category_split")};
    if (category_split.contains(key)) {
      throw DataError("category_split: duplicate category '" + raw_key + "'");
    }
    category_split.emplace(key, split_tag_from_string(raw_tag.get<std::string>()));
  }

  return Vocabulary::create(std::move(objects), std::move(verbs),
                            std::move(object_to_verbs), std::move(category_split));
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocabulary: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary(buf.str());
}

}  // namespace hoiagent

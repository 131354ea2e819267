#pragma once

#include <map>
#include <set>
#include <string>

#include "hoiagent/errors.hpp"
#include "hoiagent/labels.hpp"

namespace hoiagent {

enum class SplitTag { seen, unseen, rare, non_rare };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& s);

/// An interaction category: (verb, object).
struct CategoryKey {
  EntityLabel verb;
  EntityLabel object;

  auto operator<=>(const CategoryKey&) const = default;
};

/// Closed object/verb sets, the per-object valid-verb map, and split tags
/// per interaction category. Immutable after construction; build through
/// Vocabulary::create or load_vocabulary so the cross-reference invariants
/// hold.
class Vocabulary {
 public:
  /// Validates the cross-references (every object_to_verbs key/value is a
  /// member of objects/verbs; every split category names a valid object and
  /// a verb allowed for it). Throws DataError naming the offending entry.
  static Vocabulary create(std::set<EntityLabel> objects,
                           std::set<EntityLabel> verbs,
                           std::map<EntityLabel, std::set<EntityLabel>> object_to_verbs,
                           std::map<CategoryKey, SplitTag> category_split);

  const std::set<EntityLabel>& objects() const { return objects_; }
  const std::set<EntityLabel>& verbs() const { return verbs_; }
  const std::map<EntityLabel, std::set<EntityLabel>>& object_to_verbs() const {
    return object_to_verbs_;
  }
  const std::map<CategoryKey, SplitTag>& category_split() const {
    return category_split_;
  }

  bool has_object(const EntityLabel& o) const { return objects_.contains(o); }
  bool has_verb(const EntityLabel& v) const { return verbs_.contains(v); }

  /// True when `verb` is a valid action for `object`.
  bool verb_allowed(const EntityLabel& object, const EntityLabel& verb) const;

  /// Split tag of a category, when one was declared.
  std::optional<SplitTag> split_of(const CategoryKey& key) const;

 private:
  Vocabulary() = default;

  std::set<EntityLabel> objects_;
  std::set<EntityLabel> verbs_;
  std::map<EntityLabel, std::set<EntityLabel>> object_to_verbs_;
  std::map<CategoryKey, SplitTag> category_split_;
};

/// Loads a vocabulary document from a JSON file with keys `objects` (list),
/// `verbs` (list), `object_to_verbs` (map label -> list) and
/// `category_split` (map "verb|object" -> tag). Key names are part of the
/// format contract. Throws DataError on violations.
Vocabulary load_vocabulary(const std::string& path);

/// Same contract, parsing from an in-memory JSON string.
Vocabulary parse_vocabulary(const std::string& json_text);

}  // namespace hoiagent

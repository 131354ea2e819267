#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hoiagent/geometry.hpp"
#include "hoiagent/labels.hpp"

namespace hoiagent {

/// One <human, object, verb> record: an interaction verb, an object label,
/// and the two boxes. Predictions may carry a confidence score in [0,1];
/// ground truth and parsed agent answers do not.
struct HOITriplet {
  EntityLabel verb;
  EntityLabel object;
  BBox human_box;
  BBox object_box;
  std::optional<double> score;

  bool operator==(const HOITriplet&) const = default;
};

/// Per-image carrier of ground truth and predictions.
struct ImageRecord {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<HOITriplet> ground_truth;
  std::vector<HOITriplet> predictions;
};

/// Checks the record invariants: positive dimensions, valid boxes inside
/// [0,width]x[0,height], scores in [0,1]. Throws DataError naming the
/// offending triplet.
void validate_record(const ImageRecord& record);

}  // namespace hoiagent

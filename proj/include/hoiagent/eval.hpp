#pragma once

#include <map>
#include <string>
#include <vector>

#include "hoiagent/records.hpp"
#include "hoiagent/vocabulary.hpp"

namespace hoiagent::eval {

struct EvalDataset {
  std::vector<ImageRecord> images;
  Vocabulary vocabulary;
};

/// One prediction's contribution to a category's ranking. Emission order
/// (image index, prediction index within the image) breaks score ties so
/// the ranking is deterministic for unscored agent outputs, which default
/// to score 1.0.
struct PredictionFlag {
  double score = 1.0;
  size_t image_index = 0;
  size_t pred_index = 0;
  bool is_tp = false;
};

/// Greedy per-category matching within one image: predictions in rank
/// order claim the unclaimed ground truth with the highest min(IoU_h,
/// IoU_o), requiring both IoUs strictly above eta and exact category
/// equality. A claimed ground truth cannot be matched again.
std::map<CategoryKey, std::vector<PredictionFlag>> match_predictions(
    const ImageRecord& image, double eta);

/// All-point interpolated average precision from a score-ranked TP/FP
/// sequence. `flags` must already be in final rank order. Throws
/// std::invalid_argument when total_gt < 1.
double average_precision(const std::vector<PredictionFlag>& flags, int total_gt);

struct EvalReport {
  double eta = 0.5;
  std::map<CategoryKey, double> per_category_ap;  // evaluated categories only
  std::map<CategoryKey, int> gt_counts;
  /// Mean AP per split tag plus "full" (unweighted mean over every
  /// evaluated category). Splits with no evaluated categories report 0.
  std::map<std::string, double> split_map;
  std::map<std::string, int> split_category_counts;
  int evaluated_categories = 0;
  /// Categories that appear only in predictions (no ground-truth instance
  /// anywhere); they are excluded from all means.
  int skipped_categories = 0;
};

/// Per-category AP over the whole dataset, then unweighted means per split
/// tag. Ranking pools every image's predictions per category, sorted by
/// descending score with emission-order tie-breaking. Throws DataError when
/// a ground-truth category is absent from the vocabulary.
EvalReport evaluate(const EvalDataset& dataset, double eta = 0.5);

/// Human-readable split table for terminals and logs.
std::string render_report_table(const EvalReport& report);

}  // namespace hoiagent::eval

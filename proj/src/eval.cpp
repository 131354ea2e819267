#include "hoiagent/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "hoiagent/geometry.hpp"

namespace hoiagent::eval {

namespace {

bool ranks_before(const PredictionFlag& a, const PredictionFlag& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.image_index != b.image_index) return a.image_index < b.image_index;
  return a.pred_index < b.pred_index;
}

}  // namespace

std::map<CategoryKey, std::vector<PredictionFlag>> match_predictions(
    const ImageRecord& image, double eta) {
  std::map<CategoryKey, std::vector<size_t>> gt_by_category;
  for (size_t g = 0; g < image.ground_truth.size(); ++g) {
    const auto& t = image.ground_truth[g];
    gt_by_category[{t.verb, t.object}].push_back(g);
  }

  std::map<CategoryKey, std::vector<PredictionFlag>> out;
  std::map<CategoryKey, std::vector<size_t>> preds_by_category;
  for (size_t p = 0; p < image.predictions.size(); ++p) {
    const auto& t = image.predictions[p];
    preds_by_category[{t.verb, t.object}].push_back(p);
  }

  for (auto& [category, pred_indices] : preds_by_category) {
    auto& flags = out[category];
    std::sort(pred_indices.begin(), pred_indices.end(), [&](size_t a, size_t b) {
      const double sa = image.predictions[a].score.value_or(1.0);
      const double sb = image.predictions[b].score.value_or(1.0);
      if (sa != sb) return sa > sb;
      return a < b;
    });

    std::vector<bool> claimed;
    const std::vector<size_t>* gts = nullptr;
    if (auto it = gt_by_category.find(category); it != gt_by_category.end()) {
      gts = &it->second;
      claimed.assign(gts->size(), false);
    }

    for (size_t p : pred_indices) {
      const auto& pred = image.predictions[p];
      PredictionFlag flag;
      flag.score = pred.score.value_or(1.0);
      flag.pred_index = p;
      if (gts) {
        double best_overlap = -1.0;
        size_t best = 0;
        bool found = false;
        for (size_t k = 0; k < gts->size(); ++k) {
          if (claimed[k]) continue;
          const auto& gt = image.ground_truth[(*gts)[k]];
          const double iou_h = iou(pred.human_box, gt.human_box);
          const double iou_o = iou(pred.object_box, gt.object_box);
          if (!(iou_h > eta && iou_o > eta)) continue;
          const double overlap = std::min(iou_h, iou_o);
          if (overlap > best_overlap) {
            best_overlap = overlap;
            best = k;
            found = true;
          }
        }
        if (found) {
          claimed[best] = true;
          flag.is_tp = true;
        }
      }
      flags.push_back(flag);
    }
  }
  return out;
}

double average_precision(const std::vector<PredictionFlag>& flags, int total_gt) {
  if (total_gt < 1) throw std::invalid_argument("average_precision requires total_gt >= 1");

  std::vector<double> precision;
  std::vector<double> recall;
  precision.reserve(flags.size());
  recall.reserve(flags.size());
  int tp = 0;
  for (size_t k = 0; k < flags.size(); ++k) {
    if (flags[k].is_tp) ++tp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
  }

  // Precision envelope from the right, integrated over recall increments.
  double ap = 0.0;
  double envelope = 0.0;
  for (size_t k = flags.size(); k-- > 0;) {
    envelope = std::max(envelope, precision[k]);
    const double prev_recall = k == 0 ? 0.0 : recall[k - 1];
    if (recall[k] > prev_recall) ap += (recall[k] - prev_recall) * envelope;
  }
  return ap;
}

EvalReport evaluate(const EvalDataset& dataset, double eta) {
  const auto& vocab = dataset.vocabulary;
  std::map<CategoryKey, int> gt_counts;
  std::map<CategoryKey, std::vector<PredictionFlag>> pooled;

  for (size_t img = 0; img < dataset.images.size(); ++img) {
    const auto& image = dataset.images[img];
    for (const auto& t : image.ground_truth) {
      if (!vocab.has_object(t.object) || !vocab.verb_allowed(t.object, t.verb)) {
        throw DataError("image '" + image.image_id + "': ground-truth category '" +
                        t.verb.str() + "|" + t.object.str() +
                        "' is not in the vocabulary");
      }
      ++gt_counts[{t.verb, t.object}];
    }
    for (auto& [category, flags] : match_predictions(image, eta)) {
      auto& pool = pooled[category];
      for (auto flag : flags) {
        flag.image_index = img;
        pool.push_back(flag);
      }
    }
  }

  EvalReport report;
  report.eta = eta;
  report.gt_counts = gt_counts;

  std::map<std::string, double> split_sum;
  std::map<std::string, int> split_count;
  for (const char* key : {"seen", "unseen", "rare", "non_rare", "full"}) {
    split_sum[key] = 0.0;
    split_count[key] = 0;
  }

  for (const auto& [category, total_gt] : gt_counts) {
    auto it = pooled.find(category);
    std::vector<PredictionFlag> flags = it == pooled.end() ? std::vector<PredictionFlag>{}
                                                           : it->second;
    std::sort(flags.begin(), flags.end(), ranks_before);
    const double ap = average_precision(flags, total_gt);
    report.per_category_ap[category] = ap;
    ++report.evaluated_categories;
    split_sum["full"] += ap;
    ++split_count["full"];
    if (auto tag = vocab.split_of(category)) {
      split_sum[to_string(*tag)] += ap;
      ++split_count[to_string(*tag)];
    }
  }
  for (const auto& [category, flags] : pooled) {
    if (!gt_counts.contains(category)) ++report.skipped_categories;
  }

  for (const auto& [key, total] : split_sum) {
    const int n = split_count[key];
    report.split_map[key] = n > 0 ? total / n : 0.0;
    report.split_category_counts[key] = n;
  }
  return report;
}

std::string render_report_table(const EvalReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s %12s %6s\n", "split", "mAP", "cats");
  out += line;
  for (const char* key : {"non_rare", "rare", "seen", "unseen", "full"}) {
    std::snprintf(line, sizeof(line), "%-10s %12.6f %6d\n", key,
                  report.split_map.at(key), report.split_category_counts.at(key));
    out += line;
  }
  std::snprintf(line, sizeof(line), "evaluated=%d skipped=%d eta=%.3f\n",
                report.evaluated_categories, report.skipped_categories, report.eta);
  out += line;
  return out;
}

}  // namespace hoiagent::eval

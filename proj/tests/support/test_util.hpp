#pragma once

// Shared generators and independent oracles for the test suites. The
// oracles are deliberately written as literal brute force so they stay
// independent of the library implementation they check.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hoiagent/eval.hpp"
#include "hoiagent/geometry.hpp"
#include "hoiagent/image_io.hpp"
#include "hoiagent/records.hpp"
#include "hoiagent/reward.hpp"

namespace testutil {

/// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "hoiagent-XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Deterministic gradient raster for crop tests.
inline hoiagent::Image test_image(int width, int height) {
  hoiagent::Image image;
  image.width = width;
  image.height = height;
  image.pixels.resize(static_cast<size_t>(width) * height * 4);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto* px = image.row(y) + static_cast<size_t>(x) * 4;
      px[0] = static_cast<std::uint8_t>(x * 7 % 256);
      px[1] = static_cast<std::uint8_t>(y * 11 % 256);
      px[2] = static_cast<std::uint8_t>((x + y) * 13 % 256);
      px[3] = 255;
    }
  }
  return image;
}

inline std::string write_test_png(const TempDir& dir, const std::string& name,
                                  int width = 128, int height = 128) {
  const std::string path = dir.file(name);
  hoiagent::write_png(path, test_image(width, height));
  return path;
}

using hoiagent::BBox;
using hoiagent::EntityLabel;
using hoiagent::HOITriplet;

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline BBox random_box(std::mt19937_64& rng, double frame = 100.0) {
  std::uniform_real_distribution<double> pos(0.0, frame * 0.8);
  std::uniform_real_distribution<double> len(1.0, frame * 0.4);
  const double x1 = pos(rng);
  const double y1 = pos(rng);
  return BBox{x1, y1, x1 + len(rng), y1 + len(rng)};
}

inline EntityLabel label(const std::string& s) { return *EntityLabel::parse(s); }

inline HOITriplet random_triplet(std::mt19937_64& rng,
                                 const std::vector<std::string>& verbs,
                                 const std::vector<std::string>& objects) {
  std::uniform_int_distribution<size_t> vi(0, verbs.size() - 1);
  std::uniform_int_distribution<size_t> oi(0, objects.size() - 1);
  return HOITriplet{label(verbs[vi(rng)]), label(objects[oi(rng)]),
                    random_box(rng), random_box(rng), std::nullopt};
}

/// Exhaustive-permutation maximum of matched 1-entries in a binary matrix:
/// the optimum tp an assignment can reach. Recursion over the smaller side.
inline int oracle_max_tp(const hoiagent::reward::AffinityMatrix& s) {
  const bool transpose = s.n_pred > s.n_gt;
  const int rows = transpose ? s.n_gt : s.n_pred;
  const int cols = transpose ? s.n_pred : s.n_gt;
  std::vector<bool> used(cols, false);
  int best = 0;
  auto entry = [&](int r, int c) { return transpose ? s.at(c, r) : s.at(r, c); };
  auto recurse = [&](auto&& self, int row, int matched) -> void {
    if (row == rows) {
      best = std::max(best, matched);
      return;
    }
    if (matched + (rows - row) <= best) return;
    for (int c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = true;
      self(self, row + 1, matched + (entry(row, c) ? 1 : 0));
      used[c] = false;
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

/// Literal re-statement of the match conditions under the exact-match
/// provider: equal labels and both IoUs strictly above eta.
inline bool oracle_pair_matches(const HOITriplet& p, const HOITriplet& g, double eta) {
  return p.verb == g.verb && p.object == g.object &&
         hoiagent::iou(p.human_box, g.human_box) > eta &&
         hoiagent::iou(p.object_box, g.object_box) > eta;
}

/// Brute-force best-matching F1: enumerate all injections of the smaller
/// set into the larger one, take the best TP, then apply the F1 formula.
inline double oracle_f1(const std::vector<HOITriplet>& pred,
                        const std::vector<HOITriplet>& gt,
                        const hoiagent::reward::RewardConfig& cfg) {
  if (pred.empty() || gt.empty()) return 0.0;
  hoiagent::reward::AffinityMatrix m;
  m.n_pred = static_cast<int>(pred.size());
  m.n_gt = static_cast<int>(gt.size());
  m.entries.assign(static_cast<size_t>(m.n_pred) * m.n_gt, 0);
  for (int i = 0; i < m.n_pred; ++i) {
    for (int j = 0; j < m.n_gt; ++j) {
      if (oracle_pair_matches(pred[i], gt[j], cfg.eta)) {
        m.entries[static_cast<size_t>(i) * m.n_gt + j] = 1;
      }
    }
  }
  const double tp = oracle_max_tp(m);
  const double precision = tp / static_cast<double>(pred.size());
  const double recall = tp / static_cast<double>(gt.size());
  return 2.0 * precision * recall / (precision + recall + cfg.epsilon);
}

/// Average precision straight from the definition: for every rank where
/// recall increases, integrate the maximum precision at or beyond that
/// recall. Quadratic on purpose.
inline double oracle_average_precision(const std::vector<bool>& ranked_tp_flags,
                                       int total_gt) {
  const size_t n = ranked_tp_flags.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (size_t k = 0; k < n; ++k) {
    if (ranked_tp_flags[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (recall[k] <= prev_recall) continue;
    double envelope = 0.0;
    for (size_t j = k; j < n; ++j) envelope = std::max(envelope, precision[j]);
    ap += (recall[k] - prev_recall) * envelope;
    prev_recall = recall[k];
  }
  return ap;
}

}  // namespace testutil

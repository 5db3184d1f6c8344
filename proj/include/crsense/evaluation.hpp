#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "crsense/types.hpp"

namespace crsense {

/// Rows are true classes, columns predicted; percentages are row-normalized.
struct ConfusionMatrix {
  std::vector<std::vector<long>> counts;
  std::vector<std::vector<double>> percentages;
  long total = 0;
};

inline ConfusionMatrix confusion(const std::vector<int>& truths,
                                 const std::vector<int>& predictions,
                                 int num_classes) {
  if (truths.empty() || truths.size() != predictions.size())
    throw std::invalid_argument("confusion: need equal non-empty sequences");
  ConfusionMatrix cm;
  cm.counts.assign(static_cast<std::size_t>(num_classes),
                   std::vector<long>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i], p = predictions[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
      throw std::invalid_argument("confusion: class index out of range");
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    ++cm.total;
  }
  cm.percentages.assign(
      static_cast<std::size_t>(num_classes),
      std::vector<double>(static_cast<std::size_t>(num_classes), 0.0));
  for (int t = 0; t < num_classes; ++t) {
    long row = 0;
    for (int p = 0; p < num_classes; ++p)
      row += cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    if (row == 0) continue;
    for (int p = 0; p < num_classes; ++p)
      cm.percentages[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] =
          100.0 * static_cast<double>(
                      cm.counts[static_cast<std::size_t>(t)]
                               [static_cast<std::size_t>(p)]) /
          static_cast<double>(row);
  }
  return cm;
}

/// One-vs-rest ROC and its area for a single class.
struct RocCurve {
  struct Point {
    double threshold;
    double fpr;
    double tpr;
  };
  std::vector<Point> points;  // from (0,0) to (1,1), fpr non-decreasing
  int class_index = 0;
  double auroc = 0.0;
};

/// Threshold sweep over the sorted unique scores of the target class, ties
/// grouped into a single step; area by trapezoidal integration.
inline RocCurve roc_ovr(const std::vector<int>& truths,
                        const std::vector<RealSequence>& score_rows,
                        int class_index) {
  if (truths.size() != score_rows.size() || truths.empty())
    throw std::invalid_argument("roc_ovr: need equal non-empty sequences");
  std::vector<std::pair<double, bool>> scored;  // (score, is_positive)
  long pos = 0, neg = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!score_rows[i].allFinite())
      throw std::invalid_argument("roc_ovr: non-finite score");
    const bool is_pos = truths[i] == class_index;
    scored.emplace_back(score_rows[i][class_index], is_pos);
    (is_pos ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument(
        "roc_ovr: class needs at least one positive and one negative sample");

  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve roc;
  roc.class_index = class_index;
  roc.points.push_back(
      {std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < scored.size()) {
    const double s = scored[i].first;
    while (i < scored.size() && scored[i].first == s) {
      (scored[i].second ? tp : fp) += 1;
      ++i;
    }
    roc.points.push_back({s, static_cast<double>(fp) / neg,
                          static_cast<double>(tp) / pos});
  }
  double area = 0.0;
  for (std::size_t j = 1; j < roc.points.size(); ++j)
    area += (roc.points[j].fpr - roc.points[j - 1].fpr) *
            (roc.points[j].tpr + roc.points[j - 1].tpr) / 2.0;
  roc.auroc = area;
  return roc;
}

}  // namespace crsense

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "crsense/evaluation.hpp"
#include "crsense/rng.hpp"
#include "oracles.hpp"

using namespace crsense;

namespace {

std::vector<RealSequence> rows_from_scores(const std::vector<double>& s,
                                           int class_index, int num_classes) {
  std::vector<RealSequence> rows;
  for (double v : s) {
    RealSequence r = RealSequence::Zero(num_classes);
    r[class_index] = v;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("perfect predictions give a diagonal confusion matrix") {
  std::vector<int> truths{0, 1, 2, 0, 1, 2, 2};
  const auto cm = confusion(truths, truths, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(cm.percentages[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] ==
          100.0);
    for (int j = 0; j < 3; ++j)
      if (i != j)
        CHECK(cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
              0);
  }
  CHECK(cm.total == 7);
}

TEST_CASE("all-one-class predictions put every count in one column") {
  std::vector<int> truths{0, 1, 2, 1, 2, 0};
  std::vector<int> preds(truths.size(), 0);
  const auto cm = confusion(truths, preds, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(cm.counts[static_cast<std::size_t>(i)][0] == 2);
    CHECK(cm.percentages[static_cast<std::size_t>(i)][0] == 100.0);
  }
}

TEST_CASE("confusion matches an independent tally on random data") {
  auto rng = make_engine(1);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<int> truths, preds;
  for (int i = 0; i < 50; ++i) {
    truths.push_back(pick(rng));
    preds.push_back(pick(rng));
  }
  const auto cm = confusion(truths, preds, 3);
  const auto expected = oracles::tally(truths, preds, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

  // Row percentages sum to 100.
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j)
      sum += cm.percentages[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    CHECK(std::abs(sum - 100.0) <= 0.01);
  }
}

TEST_CASE("confusion percentages are invariant under dataset duplication") {
  std::vector<int> truths{0, 1, 2, 1, 0, 2, 2, 1};
  std::vector<int> preds{0, 2, 2, 1, 1, 0, 2, 1};
  auto both_t = truths;
  both_t.insert(both_t.end(), truths.begin(), truths.end());
  auto both_p = preds;
  both_p.insert(both_p.end(), preds.begin(), preds.end());
  const auto once = confusion(truths, preds, 3);
  const auto twice = confusion(both_t, both_p, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(once.percentages[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            doctest::Approx(
                twice.percentages[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(j)]));
}

TEST_CASE("confusion input validation") {
  CHECK_THROWS_AS(confusion({}, {}, 3), std::invalid_argument);
  CHECK_THROWS_AS(confusion({0, 1}, {0}, 3), std::invalid_argument);
  CHECK_THROWS_AS(confusion({0, 5}, {0, 1}, 3), std::invalid_argument);
}

TEST_CASE("perfect scores give AUROC 1") {
  std::vector<int> truths{1, 1, 0, 0, 2};
  std::vector<double> scores{1.0, 1.0, 0.0, 0.0, 0.0};
  const auto roc = roc_ovr(truths, rows_from_scores(scores, 1, 3), 1);
  CHECK(roc.auroc == doctest::Approx(1.0));
  CHECK(roc.points.front().fpr == 0.0);
  CHECK(roc.points.front().tpr == 0.0);
  CHECK(roc.points.back().fpr == 1.0);
  CHECK(roc.points.back().tpr == 1.0);
}

TEST_CASE("random scores give AUROC about one half") {
  auto rng = make_engine(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 1);
  std::vector<int> truths;
  std::vector<double> scores;
  for (int i = 0; i < 4000; ++i) {
    truths.push_back(pick(rng));
    scores.push_back(u(rng));
  }
  const auto roc = roc_ovr(truths, rows_from_scores(scores, 1, 2), 1);
  CHECK(roc.auroc == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(roc.auroc - 0.5) <= 0.05);
}

TEST_CASE("four-sample hand case has AUROC 0.75") {
  // Pair enumeration oracle first: positives {0.9, 0.4}, negatives
  // {0.6, 0.1} -> concordant pairs 3 of 4.
  const double oracle =
      oracles::pair_count_auroc({0.9, 0.4}, {0.6, 0.1});
  CHECK(oracle == 0.75);

  std::vector<int> truths{1, 1, 0, 0};
  std::vector<double> scores{0.9, 0.4, 0.6, 0.1};
  const auto roc = roc_ovr(truths, rows_from_scores(scores, 1, 2), 1);
  CHECK(roc.auroc == doctest::Approx(0.75));
}

TEST_CASE("trapezoid AUROC equals pair counting with ties") {
  auto rng = make_engine(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_int_distribution<int> quant(1, 8);
  for (int round = 0; round < 10; ++round) {
    std::vector<int> truths;
    std::vector<double> scores;
    std::vector<double> pos, neg;
    for (int i = 0; i < 300; ++i) {
      const int t = pick(rng);
      // Coarse quantization forces plenty of exact score ties.
      const double s = quant(rng) / 8.0 + (t == 1 ? 0.25 * u(rng) : 0.0);
      truths.push_back(t);
      scores.push_back(s);
      (t == 1 ? pos : neg).push_back(s);
    }
    const auto roc = roc_ovr(truths, rows_from_scores(scores, 1, 3), 1);
    CHECK(std::abs(roc.auroc - oracles::pair_count_auroc(pos, neg)) <= 1e-9);
  }
}

TEST_CASE("ROC sweep endpoints cover the whole range") {
  auto rng = make_engine(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> truths;
  std::vector<double> scores;
  for (int i = 0; i < 100; ++i) {
    truths.push_back(i % 2);
    scores.push_back(u(rng));
  }
  const auto roc = roc_ovr(truths, rows_from_scores(scores, 1, 2), 1);
  for (std::size_t i = 1; i < roc.points.size(); ++i)
    CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
  CHECK(roc.points.back().tpr == 1.0);
  CHECK(roc.points.back().fpr == 1.0);
}

TEST_CASE("degenerate class membership is rejected") {
  std::vector<int> truths{0, 0, 0};
  std::vector<double> scores{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(roc_ovr(truths, rows_from_scores(scores, 0, 2), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(roc_ovr(truths, rows_from_scores(scores, 0, 2), 1),
                  std::invalid_argument);
}

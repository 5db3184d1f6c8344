#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (scalar loops, pair counting) so they share no code
// path with the library.

#include <complex>
#include <vector>

#include "crsense/classifier.hpp"
#include "crsense/types.hpp"

namespace oracles {

using crsense::Complex;
using crsense::ComplexSequence;
using crsense::RealMatrix;
using crsense::RealSequence;

/// Scalar-loop matrix-vector product of a real matrix with a complex vector.
inline ComplexSequence naive_matvec(const RealMatrix& a,
                                    const ComplexSequence& x) {
  ComplexSequence y = ComplexSequence::Zero(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// Exhaustive scan for the atom with the largest |<d_j, r>|, lowest index
/// winning ties.
inline int exhaustive_best_atom(const crsense::ComplexMatrix& atoms,
                                const ComplexSequence& r) {
  int best = 0;
  double best_mag = -1.0;
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < atoms.rows(); ++i)
      acc += std::conj(atoms(i, j)) * r[i];
    const double mag = std::abs(acc);
    if (mag > best_mag) {
      best_mag = mag;
      best = static_cast<int>(j);
    }
  }
  return best;
}

/// Scalar-loop forward pass through the two-layer network.
inline RealSequence naive_forward(const crsense::ClassifierModel& model,
                                  const RealSequence& raw) {
  const auto& s = model.shape;
  std::vector<double> f(static_cast<std::size_t>(s.input_dim));
  for (int j = 0; j < s.input_dim; ++j)
    f[static_cast<std::size_t>(j)] =
        (raw[j] - model.feature_stats.mean[j]) / model.feature_stats.stddev[j];
  std::vector<double> h(static_cast<std::size_t>(s.hidden_dim));
  for (int i = 0; i < s.hidden_dim; ++i) {
    double acc = model.b1[i];
    for (int j = 0; j < s.input_dim; ++j)
      acc += model.w1(i, j) * f[static_cast<std::size_t>(j)];
    h[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-acc));
  }
  RealSequence out(s.output_dim);
  for (int i = 0; i < s.output_dim; ++i) {
    double acc = model.b2[i];
    for (int j = 0; j < s.hidden_dim; ++j)
      acc += model.w2(i, j) * h[static_cast<std::size_t>(j)];
    out[i] = 1.0 / (1.0 + std::exp(-acc));
  }
  return out;
}

/// AUROC as the probability that a random positive outscores a random
/// negative, ties counting one half.
inline double pair_count_auroc(const std::vector<double>& pos,
                               const std::vector<double>& neg) {
  double concordant = 0.0;
  for (double p : pos)
    for (double n : neg) {
      if (p > n)
        concordant += 1.0;
      else if (p == n)
        concordant += 0.5;
    }
  return concordant / (static_cast<double>(pos.size()) *
                       static_cast<double>(neg.size()));
}

/// Independent confusion tally.
inline std::vector<std::vector<long>> tally(const std::vector<int>& truths,
                                            const std::vector<int>& preds,
                                            int num_classes) {
  std::vector<std::vector<long>> counts(
      static_cast<std::size_t>(num_classes),
      std::vector<long>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < truths.size(); ++i)
    ++counts[static_cast<std::size_t>(truths[i])]
            [static_cast<std::size_t>(preds[i])];
  return counts;
}

/// Pearson correlation of two real samples.
inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracles

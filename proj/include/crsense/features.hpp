#pragma once

#include <stdexcept>

#include "crsense/pursuit.hpp"
#include "crsense/types.hpp"

namespace crsense {

/// Classifier input: the residual-norm sequence and its absolute gradient,
/// concatenated, so a length-M trace yields 2M features.
struct FeatureVector {
  RealSequence values;
  HypothesisLabel label = HypothesisLabel::H0_Hole;
  double snr_db = 0.0;
};

/// Numerical gradient (central differences, one-sided at the endpoints),
/// element-wise absolute value. Output length equals input length.
inline RealSequence absolute_gradient(const RealSequence& x) {
  const Eigen::Index n = x.size();
  if (n < 2)
    throw std::invalid_argument("absolute_gradient: need length >= 2");
  RealSequence g(n);
  g[0] = x[1] - x[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) g[i] = (x[i + 1] - x[i - 1]) / 2.0;
  g[n - 1] = x[n - 1] - x[n - 2];
  return g.cwiseAbs();
}

inline FeatureVector assemble_feature(const PursuitTrace& trace,
                                      HypothesisLabel label, double snr_db) {
  const Eigen::Index m = trace.residual_norms.size();
  FeatureVector f;
  f.values.resize(2 * m);
  f.values.head(m) = trace.residual_norms;
  f.values.tail(m) = absolute_gradient(trace.residual_norms);
  f.label = label;
  f.snr_db = snr_db;
  return f;
}

}  // namespace crsense

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace crsense {

using Complex = std::complex<double>;
using ComplexSequence = Eigen::VectorXcd;
using RealSequence = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// The four signal-source hypotheses a sensing decision can fall into.
enum class HypothesisLabel : int {
  H0_Hole = 0,    // noise only, spectrum hole
  H1_PU = 1,      // legitimate primary user
  H2_PUE = 2,     // primary-user emulator
  H3_Jammer = 3,  // unstructured jammer
};

inline const char* to_string(HypothesisLabel label) {
  switch (label) {
    case HypothesisLabel::H0_Hole: return "H0";
    case HypothesisLabel::H1_PU: return "H1";
    case HypothesisLabel::H2_PUE: return "H2";
    case HypothesisLabel::H3_Jammer: return "H3";
  }
  throw std::invalid_argument("unknown hypothesis label");
}

inline HypothesisLabel label_from_string(const std::string& s) {
  if (s == "H0") return HypothesisLabel::H0_Hole;
  if (s == "H1") return HypothesisLabel::H1_PU;
  if (s == "H2") return HypothesisLabel::H2_PUE;
  if (s == "H3") return HypothesisLabel::H3_Jammer;
  throw std::invalid_argument("unknown hypothesis label: " + s);
}

/// Conjugate-linear in the first argument; this convention is used everywhere.
inline Complex inner(const ComplexSequence& a, const ComplexSequence& b) {
  return a.dot(b);  // Eigen's dot conjugates the first operand
}

}  // namespace crsense

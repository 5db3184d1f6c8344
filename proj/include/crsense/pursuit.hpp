#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "crsense/sensing.hpp"
#include "crsense/types.hpp"

namespace crsense {

struct PursuitConfig {
  int max_iterations = 0;     // equals the compressed dimension M in the
                              // detection pipeline; the full trace is the
                              // classification feature, so there is no
                              // early-stop tolerance
  bool ls_refinement = true;  // true: OMP; false: plain matching pursuit as
                              // analyzed in the residual-gradient derivation
  bool record_residuals = false;  // keep every intermediate residual (tests)
};

struct PursuitTrace {
  RealSequence residual_norms;      // ||r_t||_2 after each iteration
  std::vector<int> selected_atoms;  // atom index chosen at each iteration
  ComplexSequence coefficients;     // ls_refinement=true: joint least-squares
                                    // weights of the selected atoms;
                                    // false: per-step projection coefficients
  ComplexSequence final_residual;
  int rank_deficient_events = 0;  // selections skipped for being in the span
  std::vector<ComplexSequence> residual_history;  // only if record_residuals
};

namespace detail {

/// argmax_j |correlations_j| over atoms where eligible(j), ties broken by
/// lowest index. Returns -1 if nothing is eligible.
template <typename Eligible>
int best_atom(const ComplexSequence& correlations, Eligible eligible) {
  int best = -1;
  double best_mag = -1.0;
  for (int j = 0; j < static_cast<int>(correlations.size()); ++j) {
    if (!eligible(j)) continue;
    const double mag = std::abs(correlations[j]);
    if (mag > best_mag) {
      best_mag = mag;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

/// Greedy sparse coding of a compressed signal against the compressed
/// dictionary, recording the residual-energy trajectory. Runs exactly
/// cfg.max_iterations iterations. With ls_refinement the coefficients of all
/// selected atoms are refit jointly each step (incremental Gram-Schmidt with
/// reorthogonalization), so the residual stays orthogonal to the selected
/// span; without it each step only removes the rank-one projection onto the
/// chosen atom.
inline PursuitTrace omp_trace(const ComplexSequence& signal,
                              const SampledDictionary& dict,
                              const PursuitConfig& cfg) {
  const int m = dict.m();
  const int k = dict.k();
  if (signal.size() != m)
    throw std::invalid_argument("omp_trace: signal length != compressed dim");
  if (cfg.max_iterations < 1 || cfg.max_iterations > m)
    throw std::invalid_argument(
        "omp_trace: max_iterations must be in [1, compressed dim]");

  const ComplexMatrix& atoms = dict.compressed_atoms;
  const int T = cfg.max_iterations;
  PursuitTrace trace;
  trace.residual_norms.resize(T);
  trace.selected_atoms.reserve(static_cast<std::size_t>(T));
  trace.coefficients = ComplexSequence::Zero(T);

  ComplexSequence r = signal;

  if (!cfg.ls_refinement) {
    // Plain matching pursuit; atoms may be re-selected.
    double prev_norm = std::numeric_limits<double>::infinity();
    for (int t = 0; t < T; ++t) {
      const ComplexSequence corr = atoms.adjoint() * r;
      const int j = detail::best_atom(corr, [](int) { return true; });
      const Complex w = corr[j];
      r -= atoms.col(j) * w;
      trace.selected_atoms.push_back(j);
      trace.coefficients[t] = w;
      prev_norm = std::min(prev_norm, r.norm());
      trace.residual_norms[t] = prev_norm;
      if (cfg.record_residuals) trace.residual_history.push_back(r);
    }
    trace.final_residual = std::move(r);
    return trace;
  }

  ComplexMatrix q(m, T);          // orthonormal basis of the selected span
  ComplexMatrix rr =              // upper-triangular factor, q * rr = atoms
      ComplexMatrix::Zero(T, T);  // restricted to the accepted selections
  ComplexSequence z = ComplexSequence::Zero(T);  // q^H * signal
  std::vector<int> accepted_slot(static_cast<std::size_t>(T), -1);
  std::vector<char> unavailable(static_cast<std::size_t>(k), 0);
  int rank = 0;
  double prev_norm = std::numeric_limits<double>::infinity();
  const double rank_tol = 1e-10;

  for (int t = 0; t < T; ++t) {
    const ComplexSequence corr = atoms.adjoint() * r;
    int chosen = -1;
    ComplexSequence v;
    ComplexSequence proj;
    while (true) {
      const int j = detail::best_atom(
          corr, [&](int idx) { return !unavailable[idx]; });
      if (j < 0) break;  // every atom already selected or in the span
      v = atoms.col(j);
      proj = ComplexSequence::Zero(rank);
      if (rank > 0) {
        // Two orthogonalization passes keep the basis orthonormal to
        // machine precision over hundreds of iterations.
        ComplexSequence h1 = q.leftCols(rank).adjoint() * v;
        v -= q.leftCols(rank) * h1;
        ComplexSequence h2 = q.leftCols(rank).adjoint() * v;
        v -= q.leftCols(rank) * h2;
        proj = h1 + h2;
      }
      if (v.norm() <= rank_tol) {
        // Atom lies in the selected span; take the next-best one.
        unavailable[j] = 1;
        ++trace.rank_deficient_events;
        continue;
      }
      chosen = j;
      break;
    }

    if (chosen < 0) {
      // Span exhausted. Record the best remaining index with no update.
      const int j = detail::best_atom(corr, [&](int idx) {
        return std::find(trace.selected_atoms.begin(),
                         trace.selected_atoms.end(),
                         idx) == trace.selected_atoms.end();
      });
      trace.selected_atoms.push_back(j < 0 ? 0 : j);
      prev_norm = std::min(prev_norm, r.norm());
      trace.residual_norms[t] = prev_norm;
      if (cfg.record_residuals) trace.residual_history.push_back(r);
      continue;
    }

    const double rdiag = v.norm();
    q.col(rank) = v / rdiag;
    rr.block(0, rank, rank, 1) = proj;
    rr(rank, rank) = rdiag;
    const Complex zt = q.col(rank).dot(r);
    z[rank] = zt;
    r -= q.col(rank) * zt;
    unavailable[static_cast<std::size_t>(chosen)] = 1;
    trace.selected_atoms.push_back(chosen);
    accepted_slot[static_cast<std::size_t>(t)] = rank;
    ++rank;

    // The exact-span endpoint leaves only rounding noise; clamping keeps the
    // recorded trace monotone there.
    prev_norm = std::min(prev_norm, r.norm());
    trace.residual_norms[t] = prev_norm;
    if (cfg.record_residuals) trace.residual_history.push_back(r);
  }

  // Back-substitute rr * w = z for the joint least-squares coefficients.
  ComplexSequence w = ComplexSequence::Zero(rank);
  for (int i = rank - 1; i >= 0; --i) {
    Complex acc = z[i];
    for (int j = i + 1; j < rank; ++j) acc -= rr(i, j) * w[j];
    w[i] = acc / rr(i, i);
  }
  for (int t = 0; t < T; ++t)
    if (accepted_slot[static_cast<std::size_t>(t)] >= 0)
      trace.coefficients[t] = w[accepted_slot[static_cast<std::size_t>(t)]];

  trace.final_residual = std::move(r);
  return trace;
}

/// One projection step r1 = r0 - E r0 with E = d d^H for a unit-norm atom d.
inline ComplexSequence projection_step(const ComplexSequence& r0,
                                       const ComplexSequence& atom) {
  if (r0.size() != atom.size())
    throw std::invalid_argument("projection_step: length mismatch");
  if (std::abs(atom.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("projection_step: atom must have unit norm");
  return r0 - atom * atom.dot(r0);
}

/// First residual-energy gradient G(1) = ||r1||^2 - ||r0||^2; never positive.
inline double gradient_first_step(const ComplexSequence& r0,
                                  const ComplexSequence& atom) {
  const ComplexSequence r1 = projection_step(r0, atom);
  return r1.squaredNorm() - r0.squaredNorm();
}

}  // namespace crsense

#pragma once

#include <stdexcept>

#include "crsense/rng.hpp"
#include "crsense/signal.hpp"
#include "crsense/types.hpp"

namespace crsense {

/// Random projection y_c = Phi * y. One matrix is drawn per experiment and
/// shared between the training and testing stages.
struct MeasurementMatrix {
  RealMatrix entries;  // m x n
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(entries.rows()); }
  int n() const { return static_cast<int>(entries.cols()); }
};

/// i.i.d. Gaussian entries with variance 1/m, the standard compressive
/// sensing ensemble. Requires m < n; the square m == n case used by the
/// full-length experiment is built with build_square_measurement.
inline MeasurementMatrix build_measurement(int m, int n, std::uint64_t seed) {
  if (m <= 0 || m >= n)
    throw std::invalid_argument("build_measurement requires 0 < m < n");
  auto rng = make_engine(seed);
  MeasurementMatrix phi;
  phi.entries = draw_real_gaussian_matrix(m, n, 1.0 / std::sqrt(m), rng);
  phi.seed = seed;
  return phi;
}

/// Square random projection for the m == n configuration.
inline MeasurementMatrix build_square_measurement(int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  auto rng = make_engine(seed);
  MeasurementMatrix phi;
  phi.entries = draw_real_gaussian_matrix(n, n, 1.0 / std::sqrt(n), rng);
  phi.seed = seed;
  return phi;
}

/// Identity map, test mode only.
inline MeasurementMatrix identity_measurement(int n) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  MeasurementMatrix phi;
  phi.entries = RealMatrix::Identity(n, n);
  phi.seed = 0;
  return phi;
}

inline ComplexSequence compress(const MeasurementMatrix& phi,
                                const ComplexSequence& y) {
  if (y.size() != phi.n())
    throw std::invalid_argument("compress: signal length != n");
  // Real Phi applied to real and imaginary parts separately.
  RealSequence re = phi.entries * y.real().matrix();
  RealSequence im = phi.entries * y.imag().matrix();
  ComplexSequence out(phi.m());
  out.real() = re;
  out.imag() = im;
  return out;
}

inline ComplexMatrix compress_matrix(const MeasurementMatrix& phi,
                                     const ComplexMatrix& a) {
  if (a.rows() != phi.n())
    throw std::invalid_argument("compress_matrix: row count != n");
  RealMatrix re = phi.entries * a.real().matrix();
  RealMatrix im = phi.entries * a.imag().matrix();
  ComplexMatrix out(phi.m(), a.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

/// Dictionary of sampled data vectors convolved with the PU channel, plus its
/// compressed image. Columns are scaled so each compressed atom has unit
/// l2 norm; the same scale is applied to the uncompressed column, so
/// compressed_atoms == Phi * atoms holds exactly after normalization.
struct SampledDictionary {
  ComplexMatrix atoms;             // n x k
  ComplexMatrix compressed_atoms;  // m x k
  ChannelRealization pu_channel;

  int k() const { return static_cast<int>(atoms.cols()); }
  int n() const { return static_cast<int>(atoms.rows()); }
  int m() const { return static_cast<int>(compressed_atoms.rows()); }
};

/// Independently synthesized data waveforms, one per dictionary column.
inline ComplexMatrix synthesize_atom_source(const WaveformSpec& spec, int k,
                                            std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  ComplexMatrix x(spec.signal_length, k);
  for (int j = 0; j < k; ++j)
    x.col(j) = synthesize_waveform(
        spec, derive_seed(seed, SeedStream::Dictionary,
                          static_cast<std::uint64_t>(j)));
  return x;
}

/// Convolves a fixed atom source with the given channel and compresses it.
/// Splitting this from build_dictionary lets an experiment reuse one source
/// across many per-sample channels.
inline SampledDictionary build_dictionary_from_source(
    const ChannelRealization& pu_channel, const ComplexMatrix& source,
    const MeasurementMatrix& phi) {
  const int n = static_cast<int>(source.rows());
  const int k = static_cast<int>(source.cols());
  if (n != phi.n())
    throw std::invalid_argument("dictionary source length != phi.n");
  if (k <= phi.m())
    throw std::invalid_argument(
        "dictionary must be overcomplete in the compressed domain (k > m)");

  SampledDictionary dict;
  dict.pu_channel = pu_channel;
  dict.atoms.resize(n, k);
  for (int j = 0; j < k; ++j)
    dict.atoms.col(j) = convolve_truncate(pu_channel.taps, source.col(j), n);
  dict.compressed_atoms = compress_matrix(phi, dict.atoms);
  for (int j = 0; j < k; ++j) {
    const double norm = dict.compressed_atoms.col(j).norm();
    if (norm <= 0.0)
      throw std::invalid_argument("dictionary atom compressed to zero");
    dict.compressed_atoms.col(j) /= norm;
    dict.atoms.col(j) /= norm;
  }
  return dict;
}

inline SampledDictionary build_dictionary(const ChannelRealization& pu_channel,
                                          const WaveformSpec& spec, int k,
                                          const MeasurementMatrix& phi,
                                          std::uint64_t seed) {
  if (k <= phi.m())
    throw std::invalid_argument(
        "dictionary must be overcomplete in the compressed domain (k > m)");
  return build_dictionary_from_source(
      pu_channel, synthesize_atom_source(spec, k, seed), phi);
}

}  // namespace crsense

#pragma once

#include <cstdint>
#include <random>

#include "crsense/types.hpp"

namespace crsense {

// Stream tags for deriving independent per-purpose seeds from one master
// seed. Each (master, stream, index) triple maps to its own engine, so
// samples can be generated in any order or in parallel and still match a
// sequential run.
enum class SeedStream : std::uint64_t {
  Channel = 1,
  Waveform = 2,
  Noise = 3,
  Jammer = 4,
  Measurement = 5,
  Dictionary = 6,
  ClassifierInit = 7,
  TrainShuffle = 8,
  IllegitChannel = 9,
  TrainSample = 10,
  TestSample = 11,
};

namespace detail {
// splitmix64 finalizer; decorrelates consecutive counter values.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = detail::mix64(master);
  h = detail::mix64(h ^ static_cast<std::uint64_t>(stream));
  return detail::mix64(h ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline ComplexSequence draw_complex_gaussian(std::size_t n, double variance,
                                             std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  ComplexSequence out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    out[i] = Complex(re, im);
  }
  return out;
}

inline RealMatrix draw_real_gaussian_matrix(Eigen::Index rows,
                                            Eigen::Index cols, double stddev,
                                            std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, stddev);
  RealMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = gauss(rng);
  return out;
}

}  // namespace crsense

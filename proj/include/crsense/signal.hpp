#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsense/rng.hpp"
#include "crsense/types.hpp"

namespace crsense {

enum class Modulation { QAM, PAM, PSK, FSK };

inline const char* to_string(Modulation m) {
  switch (m) {
    case Modulation::QAM: return "qam";
    case Modulation::PAM: return "pam";
    case Modulation::PSK: return "psk";
    case Modulation::FSK: return "fsk";
  }
  throw std::invalid_argument("unknown modulation");
}

inline Modulation modulation_from_string(const std::string& s) {
  if (s == "qam") return Modulation::QAM;
  if (s == "pam") return Modulation::PAM;
  if (s == "psk") return Modulation::PSK;
  if (s == "fsk") return Modulation::FSK;
  throw std::invalid_argument("unknown modulation: " + s);
}

struct WaveformSpec {
  Modulation modulation = Modulation::QAM;
  int order = 4;             // constellation size, power of 2
  int oversampling = 10;     // samples per symbol
  double rolloff = 0.2;      // square-root-raised-cosine roll-off
  int span_symbols = 50;     // pulse span in symbols
  int signal_length = 100;   // output samples N
  double carrier_offset = 0.0;  // normalized frequency, cycles per sample

  void validate() const {
    std::string errs;
    if (signal_length <= 0) errs += "signal_length must be > 0; ";
    if (oversampling < 1) errs += "oversampling must be >= 1; ";
    if (order < 2 || (order & (order - 1)) != 0)
      errs += "order must be a power of 2 >= 2; ";
    if (rolloff < 0.0 || rolloff > 1.0) errs += "rolloff must be in [0,1]; ";
    if (span_symbols < 1) errs += "span_symbols must be >= 1; ";
    if (!errs.empty()) throw std::invalid_argument("WaveformSpec: " + errs);
  }
};

struct ChannelRealization {
  ComplexSequence taps;
  double rho = 1.0;  // correlation factor relative to the reference draw

  int tap_count() const { return static_cast<int>(taps.size()); }
};

struct ReceivedSignal {
  ComplexSequence samples;
  HypothesisLabel label = HypothesisLabel::H0_Hole;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// Multipath Rayleigh channel: i.i.d. complex Gaussian taps at sample-period
/// spacing, total mean power 1.
inline ChannelRealization draw_channel(int tap_count, std::uint64_t rng_seed) {
  if (tap_count < 1) throw std::invalid_argument("tap_count must be >= 1");
  auto rng = make_engine(rng_seed);
  ChannelRealization ch;
  ch.taps = draw_complex_gaussian(static_cast<std::size_t>(tap_count),
                                  1.0 / tap_count, rng);
  ch.rho = 1.0;
  return ch;
}

/// Tap-wise rho*h + (1-rho), the literal correlation model. The additive term
/// is the scalar constant (1-rho), not a fresh draw, so the seed argument is
/// reserved and currently unused.
inline ChannelRealization correlate_channel(const ChannelRealization& reference,
                                            double rho,
                                            [[maybe_unused]] std::uint64_t rng_seed = 0) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("rho must be in [0,1]");
  ChannelRealization out;
  out.taps = rho * reference.taps +
             ComplexSequence::Constant(reference.taps.size(), 1.0 - rho);
  out.rho = rho;
  return out;
}

// ---------------------------------------------------------------------------
// Waveforms
// ---------------------------------------------------------------------------

namespace detail {

/// Square-root-raised-cosine impulse response at t samples from the peak,
/// symbol period Ts samples. Unnormalized; callers rescale.
inline double srrc_tap(double t, double Ts, double alpha) {
  const double pi = std::numbers::pi;
  const double tau = t / Ts;
  if (alpha <= 0.0) {
    if (std::abs(tau) < 1e-12) return 1.0;
    return std::sin(pi * tau) / (pi * tau);
  }
  if (std::abs(tau) < 1e-12) return 1.0 - alpha + 4.0 * alpha / pi;
  const double crit = 1.0 / (4.0 * alpha);
  if (std::abs(std::abs(tau) - crit) < 1e-12) {
    return (alpha / std::numbers::sqrt2) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * alpha)) +
            (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * alpha)));
  }
  const double num = std::sin(pi * tau * (1.0 - alpha)) +
                     4.0 * alpha * tau * std::cos(pi * tau * (1.0 + alpha));
  const double den = pi * tau * (1.0 - 16.0 * alpha * alpha * tau * tau);
  return num / den;
}

/// Filter taps covering span_symbols symbol periods, centered on the peak.
inline std::vector<double> srrc_filter(int oversampling, double rolloff,
                                       int span_symbols) {
  const int half = span_symbols * oversampling / 2;
  std::vector<double> g(2 * half + 1);
  for (int k = -half; k <= half; ++k)
    g[static_cast<std::size_t>(k + half)] =
        srrc_tap(static_cast<double>(k), static_cast<double>(oversampling),
                 rolloff);
  return g;
}

inline std::vector<Complex> constellation(Modulation mod, int order) {
  std::vector<Complex> points;
  points.reserve(static_cast<std::size_t>(order));
  switch (mod) {
    case Modulation::PAM: {
      for (int i = 0; i < order; ++i)
        points.emplace_back(2.0 * i - order + 1.0, 0.0);
      break;
    }
    case Modulation::PSK: {
      for (int i = 0; i < order; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / order;
        points.emplace_back(std::cos(phi), std::sin(phi));
      }
      break;
    }
    case Modulation::QAM: {
      // Rectangular grid, wider in-phase side for non-square orders.
      int wbits = 0;
      for (int o = order; o > 1; o >>= 1) ++wbits;
      const int w = 1 << ((wbits + 1) / 2);
      const int h = order / w;
      for (int q = 0; q < h; ++q)
        for (int i = 0; i < w; ++i)
          points.emplace_back(2.0 * i - w + 1.0, 2.0 * q - h + 1.0);
      break;
    }
    case Modulation::FSK:
      throw std::invalid_argument("FSK has no symbol constellation");
  }
  double power = 0.0;
  for (const auto& p : points) power += std::norm(p);
  const double scale = std::sqrt(points.size() / power);
  for (auto& p : points) p *= scale;
  return points;
}

}  // namespace detail

/// Random symbols from the chosen constellation, square-root-raised-cosine
/// pulse shaped at the configured oversampling, truncated to signal_length
/// samples, unit average power in expectation. FSK is realized as baseband
/// tone-shift keying over symbol periods.
inline ComplexSequence synthesize_waveform(const WaveformSpec& spec,
                                           std::uint64_t rng_seed) {
  spec.validate();
  const int N = spec.signal_length;
  const int os = spec.oversampling;
  auto rng = make_engine(rng_seed);
  std::uniform_int_distribution<int> pick(0, spec.order - 1);
  ComplexSequence x = ComplexSequence::Zero(N);

  if (spec.modulation == Modulation::FSK) {
    const int symbols = (N + os - 1) / os;
    for (int m = 0; m < symbols; ++m) {
      const int u = pick(rng);
      const double f = (u - (spec.order - 1) / 2.0) / os;
      for (int n = m * os; n < std::min(N, (m + 1) * os); ++n) {
        const double phi = 2.0 * std::numbers::pi * f * (n - m * os);
        x[n] = Complex(std::cos(phi), std::sin(phi));
      }
    }
  } else {
    const auto points = detail::constellation(spec.modulation, spec.order);
    const auto g = detail::srrc_filter(os, spec.rolloff, spec.span_symbols);
    const int half = (static_cast<int>(g.size()) - 1) / 2;
    // Symbols whose pulse overlaps [0, N); negative indices give the leading
    // samples a stationary (warmed-up) distribution.
    const int m_lo = -(half / os) - 1;
    const int m_hi = (N - 1 + half) / os + 1;
    std::vector<Complex> symbols;
    symbols.reserve(static_cast<std::size_t>(m_hi - m_lo + 1));
    for (int m = m_lo; m <= m_hi; ++m)
      symbols.push_back(points[static_cast<std::size_t>(pick(rng))]);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    const double scale = 1.0 / std::sqrt(g2 / os);
    for (int n = 0; n < N; ++n) {
      Complex acc = 0.0;
      for (int m = m_lo; m <= m_hi; ++m) {
        const int k = n - m * os;
        if (k < -half || k > half) continue;
        acc += symbols[static_cast<std::size_t>(m - m_lo)] *
               g[static_cast<std::size_t>(k + half)];
      }
      x[n] = acc * scale;
    }
  }

  if (spec.carrier_offset != 0.0) {
    for (int n = 0; n < N; ++n) {
      const double phi = 2.0 * std::numbers::pi * spec.carrier_offset * n;
      x[n] *= Complex(std::cos(phi), std::sin(phi));
    }
  }
  return x;
}

/// Unstructured jamming signal: i.i.d. complex Gaussian, unit average power.
inline ComplexSequence synthesize_jammer(int length, std::uint64_t rng_seed) {
  if (length < 1) throw std::invalid_argument("jammer length must be >= 1");
  auto rng = make_engine(rng_seed);
  return draw_complex_gaussian(static_cast<std::size_t>(length), 1.0, rng);
}

/// First N samples of the linear convolution taps * x.
inline ComplexSequence convolve_truncate(const ComplexSequence& taps,
                                         const ComplexSequence& x, int n_out) {
  ComplexSequence y = ComplexSequence::Zero(n_out);
  const int L = static_cast<int>(taps.size());
  const int Nx = static_cast<int>(x.size());
  for (int n = 0; n < n_out; ++n) {
    Complex acc = 0.0;
    const int l_hi = std::min(L - 1, n);
    for (int l = 0; l <= l_hi; ++l) {
      const int i = n - l;
      if (i < Nx) acc += taps[l] * x[i];
    }
    y[n] = acc;
  }
  return y;
}

/// Signal and noise parts of a received signal, kept separate so tests can
/// measure their energies independently.
struct ReceiveParts {
  ComplexSequence signal_part;  // h * x truncated to N (zero for H0)
  ComplexSequence noise_part;
  ChannelRealization channel;  // channel the signal part went through
  ComplexSequence samples;     // signal_part + noise_part
};

/// Noise variance per complex sample for a requested SNR, relative to a
/// unit-average-power signal; shared by all hypotheses so the noise floor is
/// identical across classes at a given snr_db.
inline double noise_variance_for_snr(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

inline ReceiveParts synth_components(HypothesisLabel label,
                                     const ChannelRealization& pu_channel,
                                     const WaveformSpec& spec, double snr_db,
                                     std::uint64_t rng_seed) {
  spec.validate();
  if (pu_channel.tap_count() < 1)
    throw std::invalid_argument("pu_channel must have >= 1 tap");
  const int N = spec.signal_length;
  const std::uint64_t symbol_seed = derive_seed(rng_seed, SeedStream::Waveform);
  const std::uint64_t noise_seed = derive_seed(rng_seed, SeedStream::Noise);
  const std::uint64_t illegit_seed =
      derive_seed(rng_seed, SeedStream::IllegitChannel);

  ReceiveParts parts;
  auto noise_rng = make_engine(noise_seed);
  parts.noise_part = draw_complex_gaussian(
      static_cast<std::size_t>(N), noise_variance_for_snr(snr_db), noise_rng);

  switch (label) {
    case HypothesisLabel::H0_Hole:
      parts.signal_part = ComplexSequence::Zero(N);
      parts.channel = pu_channel;
      break;
    case HypothesisLabel::H1_PU:
      parts.channel = pu_channel;
      parts.signal_part = convolve_truncate(
          pu_channel.taps, synthesize_waveform(spec, symbol_seed), N);
      break;
    case HypothesisLabel::H2_PUE:
      // Spatial decorrelation: the emulator transmits the same waveform
      // family over its own independent channel.
      parts.channel = draw_channel(pu_channel.tap_count(), illegit_seed);
      parts.signal_part = convolve_truncate(
          parts.channel.taps, synthesize_waveform(spec, symbol_seed), N);
      break;
    case HypothesisLabel::H3_Jammer:
      parts.channel = draw_channel(pu_channel.tap_count(), illegit_seed);
      parts.signal_part = convolve_truncate(
          parts.channel.taps,
          synthesize_jammer(N, derive_seed(rng_seed, SeedStream::Jammer)), N);
      break;
    default:
      throw std::invalid_argument("invalid hypothesis label");
  }
  parts.samples = parts.signal_part + parts.noise_part;
  return parts;
}

inline ReceivedSignal receive(HypothesisLabel label,
                              const ChannelRealization& pu_channel,
                              const WaveformSpec& spec, double snr_db,
                              std::uint64_t rng_seed) {
  ReceivedSignal out;
  out.samples =
      synth_components(label, pu_channel, spec, snr_db, rng_seed).samples;
  out.label = label;
  out.snr_db = snr_db;
  out.seed = rng_seed;
  return out;
}

}  // namespace crsense

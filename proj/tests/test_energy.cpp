#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "crsense/energy.hpp"
#include "oracles.hpp"

using namespace crsense;

TEST_CASE("energy_of basic values") {
  ReceivedSignal zero;
  zero.samples = ComplexSequence::Zero(10);
  CHECK(energy_of(zero).energy == 0.0);

  ReceivedSignal one;
  one.samples = ComplexSequence::Constant(1, Complex(3.0, 4.0));
  CHECK(energy_of(one).energy == 25.0);

  ReceivedSignal empty;
  empty.samples = ComplexSequence();
  CHECK_THROWS_AS(energy_of(empty), std::invalid_argument);
}

TEST_CASE("energy_of agrees with a direct summation oracle") {
  auto rng = make_engine(2);
  ReceivedSignal sig;
  sig.samples = draw_complex_gaussian(64, 1.3, rng);
  double direct = 0.0;
  for (int i = 0; i < 64; ++i)
    direct += sig.samples[i].real() * sig.samples[i].real() +
              sig.samples[i].imag() * sig.samples[i].imag();
  CHECK(std::abs(energy_of(sig).energy - direct) <= 1e-12 * direct);
}

TEST_CASE("energies separate H0 from H1 at high SNR") {
  WaveformSpec spec;
  std::vector<double> h0, h1;
  for (int i = 0; i < 150; ++i) {
    const auto ch = draw_channel(7, 300 + static_cast<std::uint64_t>(i));
    h0.push_back(energy_of(receive(HypothesisLabel::H0_Hole, ch, spec, 20.0,
                                   static_cast<std::uint64_t>(i)))
                     .energy);
    h1.push_back(energy_of(receive(HypothesisLabel::H1_PU, ch, spec, 20.0,
                                   1000 + static_cast<std::uint64_t>(i)))
                     .energy);
  }
  // Threshold oracle: best split over all candidate thresholds.
  std::vector<double> all = h0;
  all.insert(all.end(), h1.begin(), h1.end());
  std::sort(all.begin(), all.end());
  double best = 0.0;
  for (double thr : all) {
    int correct = 0;
    for (double e : h0) correct += e <= thr;
    for (double e : h1) correct += e > thr;
    best = std::max(best, static_cast<double>(correct) / (2.0 * 150));
  }
  CHECK(best >= 0.95);
}

TEST_CASE("train_ed on identical-energy classes is at chance") {
  auto rng = make_engine(5);
  std::normal_distribution<double> noise(10.0, 1.0);
  std::vector<EnergyFeature> data;
  const HypothesisLabel labels[3] = {HypothesisLabel::H0_Hole,
                                     HypothesisLabel::H1_PU,
                                     HypothesisLabel::H2_PUE};
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 120; ++i) {
      EnergyFeature e;
      e.energy = noise(rng);
      e.label = labels[c];
      data.push_back(e);
    }
  TrainOptions opt;
  opt.epochs = 80;
  opt.seed = 6;
  const auto [model, report] = train_ed(data, 8, 3, opt);
  int hits = 0;
  for (const auto& e : data)
    hits += predict(model, e.as_feature().values).label == e.label;
  const double acc = static_cast<double>(hits) / static_cast<double>(data.size());
  CHECK(acc >= 1.0 / 3.0 - 0.10);
  CHECK(acc <= 1.0 / 3.0 + 0.10);
}

TEST_CASE("train_ed separates classes with distinct energy bands") {
  auto rng = make_engine(7);
  std::normal_distribution<double> n0(2.0, 0.2), n1(8.0, 0.4), n2(20.0, 0.8);
  std::vector<EnergyFeature> data;
  for (int i = 0; i < 100; ++i) {
    data.push_back({n0(rng), HypothesisLabel::H0_Hole, 0.0});
    data.push_back({n1(rng), HypothesisLabel::H1_PU, 0.0});
    data.push_back({n2(rng), HypothesisLabel::H2_PUE, 0.0});
  }
  TrainOptions opt;
  opt.epochs = 150;
  opt.seed = 8;
  const auto [model, report] = train_ed(data, 8, 3, opt);
  CHECK(report.final_train_accuracy >= 0.95);
}

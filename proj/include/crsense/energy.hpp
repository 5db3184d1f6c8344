#pragma once

#include <stdexcept>
#include <vector>

#include "crsense/classifier.hpp"
#include "crsense/signal.hpp"
#include "crsense/types.hpp"

namespace crsense {

/// Scalar total-energy feature for the energy-detection comparison baseline.
struct EnergyFeature {
  double energy = 0.0;  // ||y||_2^2 of the received signal
  HypothesisLabel label = HypothesisLabel::H0_Hole;
  double snr_db = 0.0;

  FeatureVector as_feature() const {
    FeatureVector f;
    f.values = RealSequence::Constant(1, energy);
    f.label = label;
    f.snr_db = snr_db;
    return f;
  }
};

inline EnergyFeature energy_of(const ReceivedSignal& signal) {
  if (signal.samples.size() == 0)
    throw std::invalid_argument("energy_of: empty signal");
  EnergyFeature e;
  e.energy = signal.samples.squaredNorm();
  e.label = signal.label;
  e.snr_db = signal.snr_db;
  return e;
}

/// Same network and training loop as the proposed pipeline, input_dim = 1.
inline std::pair<ClassifierModel, TrainReport> train_ed(
    const std::vector<EnergyFeature>& dataset, int hidden_dim, int num_classes,
    const TrainOptions& options) {
  std::vector<FeatureVector> features;
  features.reserve(dataset.size());
  for (const auto& e : dataset) features.push_back(e.as_feature());
  NetworkShape shape{1, hidden_dim, num_classes};
  return train(features, shape, options);
}

}  // namespace crsense

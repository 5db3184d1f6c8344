#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "crsense/features.hpp"
#include "crsense/rng.hpp"
#include "crsense/types.hpp"

namespace crsense {

struct NetworkShape {
  int input_dim = 0;   // 2M for the proposed features, 1 for energy detection
  int hidden_dim = 64;
  int output_dim = 3;

  void validate() const {
    if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
      throw std::invalid_argument("NetworkShape: all dims must be >= 1");
  }
};

/// Per-feature standardization statistics, estimated on the training split
/// and stored with the model.
struct FeatureStats {
  RealSequence mean;
  RealSequence stddev;

  RealSequence apply(const RealSequence& f) const {
    return (f - mean).cwiseQuotient(stddev);
  }
};

struct ClassifierModel {
  NetworkShape shape;
  RealMatrix w1;  // hidden x input
  RealSequence b1;
  RealMatrix w2;  // output x hidden
  RealSequence b2;
  FeatureStats feature_stats;
  std::vector<HypothesisLabel> class_map;  // output index -> label
};

struct TrainOptions {
  int epochs = 300;
  double learning_rate = 0.01;
  int batch_size = 64;
  double momentum = 0.9;
  double heldout_fraction = 0.1;  // stratified by class
  std::uint64_t seed = 0;
};

struct TrainReport {
  RealSequence train_loss;    // per epoch
  RealSequence heldout_loss;  // per epoch
  int epochs = 0;
  double final_train_accuracy = 0.0;
  double final_heldout_accuracy = 0.0;
};

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

/// Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases
/// zero; deterministic per seed.
inline ClassifierModel init_model(const NetworkShape& shape,
                                  std::uint64_t seed) {
  shape.validate();
  auto rng = make_engine(seed);
  ClassifierModel model;
  model.shape = shape;
  const double a1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
  model.w1.resize(shape.hidden_dim, shape.input_dim);
  for (int i = 0; i < shape.hidden_dim; ++i)
    for (int j = 0; j < shape.input_dim; ++j) model.w1(i, j) = u1(rng);
  model.b1 = RealSequence::Zero(shape.hidden_dim);
  model.w2.resize(shape.output_dim, shape.hidden_dim);
  for (int i = 0; i < shape.output_dim; ++i)
    for (int j = 0; j < shape.hidden_dim; ++j) model.w2(i, j) = u2(rng);
  model.b2 = RealSequence::Zero(shape.output_dim);
  model.feature_stats.mean = RealSequence::Zero(shape.input_dim);
  model.feature_stats.stddev = RealSequence::Ones(shape.input_dim);
  return model;
}

/// sigma(W2 * sigma(W1 * normalize(f) + b1) + b2), every score in (0,1).
inline RealSequence forward(const ClassifierModel& model,
                            const RealSequence& features) {
  if (features.size() != model.shape.input_dim)
    throw std::invalid_argument("forward: feature length != input_dim");
  const RealSequence f = model.feature_stats.apply(features);
  RealSequence h = model.w1 * f + model.b1;
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = sigmoid(h[i]);
  RealSequence s = model.w2 * h + model.b2;
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i]);
  return s;
}

struct Prediction {
  HypothesisLabel label;
  RealSequence scores;
};

/// Argmax of the class scores; exact ties go to the lowest class index.
inline Prediction predict(const ClassifierModel& model,
                          const RealSequence& features) {
  Prediction p;
  p.scores = forward(model, features);
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.scores.size()); ++i)
    if (p.scores[i] > p.scores[best]) best = i;
  p.label = model.class_map.at(static_cast<std::size_t>(best));
  return p;
}

namespace detail {

struct Batch {
  RealMatrix inputs;   // input_dim x B, already standardized
  RealMatrix targets;  // output_dim x B, one-hot
};

struct Gradients {
  RealMatrix w1;
  RealSequence b1;
  RealMatrix w2;
  RealSequence b2;
};

/// Numerically stable sum of per-class binary cross-entropies from the
/// pre-sigmoid activations.
inline double bce_from_logits(const RealMatrix& logits,
                              const RealMatrix& targets) {
  double loss = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double a = logits(i, j);
      const double t = targets(i, j);
      loss += std::max(a, 0.0) - a * t + std::log1p(std::exp(-std::abs(a)));
    }
  return loss / static_cast<double>(logits.cols());
}

/// Mean cross-entropy over the batch and its gradient w.r.t. every
/// parameter. Inputs are already standardized.
inline double loss_and_gradients(const ClassifierModel& model,
                                 const Batch& batch, Gradients* grads) {
  const Eigen::Index b = batch.inputs.cols();
  RealMatrix a1 = model.w1 * batch.inputs;
  a1.colwise() += model.b1;
  RealMatrix h = a1.unaryExpr([](double v) { return sigmoid(v); });
  RealMatrix a2 = model.w2 * h;
  a2.colwise() += model.b2;
  const double loss = bce_from_logits(a2, batch.targets);
  if (grads) {
    RealMatrix s = a2.unaryExpr([](double v) { return sigmoid(v); });
    RealMatrix d2 = (s - batch.targets) / static_cast<double>(b);
    grads->w2 = d2 * h.transpose();
    grads->b2 = d2.rowwise().sum();
    RealMatrix d1 = (model.w2.transpose() * d2).array() * h.array() *
                    (1.0 - h.array());
    grads->w1 = d1 * batch.inputs.transpose();
    grads->b1 = d1.rowwise().sum();
  }
  return loss;
}

inline double accuracy(const ClassifierModel& model, const RealMatrix& inputs,
                       const std::vector<int>& classes) {
  if (classes.empty()) return 0.0;
  RealMatrix a1 = model.w1 * inputs;
  a1.colwise() += model.b1;
  RealMatrix h = a1.unaryExpr([](double v) { return sigmoid(v); });
  RealMatrix a2 = model.w2 * h;
  a2.colwise() += model.b2;
  int hits = 0;
  for (Eigen::Index j = 0; j < a2.cols(); ++j) {
    Eigen::Index best;
    a2.col(j).maxCoeff(&best);
    if (static_cast<int>(best) == classes[static_cast<std::size_t>(j)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(classes.size());
}

}  // namespace detail

/// Mini-batch gradient descent with momentum on the mean cross-entropy
/// between one-hot targets and the sigmoid outputs. A stratified held-out
/// split provides the generalization loss curve.
inline std::pair<ClassifierModel, TrainReport> train(
    const std::vector<FeatureVector>& dataset, const NetworkShape& shape,
    const TrainOptions& options) {
  shape.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (options.epochs < 1) throw std::invalid_argument("train: epochs >= 1");
  if (options.batch_size < 1)
    throw std::invalid_argument("train: batch_size >= 1");

  // Class map from the labels present, ordered by enum value.
  std::vector<HypothesisLabel> classes;
  for (const auto& f : dataset) {
    if (f.values.size() != shape.input_dim)
      throw std::invalid_argument("train: feature length != input_dim");
    if (std::find(classes.begin(), classes.end(), f.label) == classes.end())
      classes.push_back(f.label);
  }
  std::sort(classes.begin(), classes.end());
  if (static_cast<int>(classes.size()) != shape.output_dim)
    throw std::invalid_argument(
        "train: dataset must contain samples of every class");
  auto class_index = [&](HypothesisLabel l) {
    return static_cast<int>(std::find(classes.begin(), classes.end(), l) -
                            classes.begin());
  };

  // Stratified held-out split.
  auto rng = make_engine(derive_seed(options.seed, SeedStream::TrainShuffle));
  std::vector<std::size_t> train_idx, held_idx;
  for (int c = 0; c < shape.output_dim; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (class_index(dataset[i].label) == c) members.push_back(i);
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t held =
        std::min(members.size() - 1,
                 static_cast<std::size_t>(std::floor(
                     options.heldout_fraction *
                     static_cast<double>(members.size()))));
    held_idx.insert(held_idx.end(), members.begin(),
                    members.begin() + static_cast<std::ptrdiff_t>(held));
    train_idx.insert(train_idx.end(),
                     members.begin() + static_cast<std::ptrdiff_t>(held),
                     members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(held_idx.begin(), held_idx.end());

  // Standardization statistics from the gradient-descent split only.
  const int dim = shape.input_dim;
  ClassifierModel model =
      init_model(shape, derive_seed(options.seed, SeedStream::ClassifierInit));
  model.class_map = classes;
  RealSequence mean = RealSequence::Zero(dim);
  for (auto i : train_idx) mean += dataset[i].values;
  mean /= static_cast<double>(train_idx.size());
  RealSequence var = RealSequence::Zero(dim);
  for (auto i : train_idx)
    var += (dataset[i].values - mean).cwiseAbs2();
  var /= static_cast<double>(train_idx.size());
  model.feature_stats.mean = mean;
  model.feature_stats.stddev =
      var.cwiseSqrt().cwiseMax(1e-12);  // constant features stay finite
  const FeatureStats& stats = model.feature_stats;

  auto materialize = [&](const std::vector<std::size_t>& idx,
                         RealMatrix& inputs, RealMatrix& targets,
                         std::vector<int>& cls) {
    inputs.resize(dim, static_cast<Eigen::Index>(idx.size()));
    targets = RealMatrix::Zero(shape.output_dim,
                               static_cast<Eigen::Index>(idx.size()));
    cls.resize(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      inputs.col(static_cast<Eigen::Index>(j)) =
          stats.apply(dataset[idx[j]].values);
      const int c = class_index(dataset[idx[j]].label);
      targets(c, static_cast<Eigen::Index>(j)) = 1.0;
      cls[j] = c;
    }
  };
  RealMatrix train_in, train_tg, held_in, held_tg;
  std::vector<int> train_cls, held_cls;
  materialize(train_idx, train_in, train_tg, train_cls);
  materialize(held_idx, held_in, held_tg, held_cls);

  TrainReport report;
  report.epochs = options.epochs;
  report.train_loss.resize(options.epochs);
  report.heldout_loss.resize(options.epochs);

  detail::Gradients g;
  detail::Gradients vel;
  vel.w1 = RealMatrix::Zero(shape.hidden_dim, dim);
  vel.b1 = RealSequence::Zero(shape.hidden_dim);
  vel.w2 = RealMatrix::Zero(shape.output_dim, shape.hidden_dim);
  vel.b2 = RealSequence::Zero(shape.output_dim);

  std::vector<Eigen::Index> order(train_idx.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<Eigen::Index>(i);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(options.batch_size));
      detail::Batch batch;
      batch.inputs.resize(dim, static_cast<Eigen::Index>(stop - start));
      batch.targets.resize(shape.output_dim,
                           static_cast<Eigen::Index>(stop - start));
      for (std::size_t j = start; j < stop; ++j) {
        batch.inputs.col(static_cast<Eigen::Index>(j - start)) =
            train_in.col(order[j]);
        batch.targets.col(static_cast<Eigen::Index>(j - start)) =
            train_tg.col(order[j]);
      }
      detail::loss_and_gradients(model, batch, &g);
      vel.w1 = options.momentum * vel.w1 + g.w1;
      vel.b1 = options.momentum * vel.b1 + g.b1;
      vel.w2 = options.momentum * vel.w2 + g.w2;
      vel.b2 = options.momentum * vel.b2 + g.b2;
      model.w1 -= options.learning_rate * vel.w1;
      model.b1 -= options.learning_rate * vel.b1;
      model.w2 -= options.learning_rate * vel.w2;
      model.b2 -= options.learning_rate * vel.b2;
    }
    detail::Batch all{train_in, train_tg};
    report.train_loss[epoch] = detail::loss_and_gradients(model, all, nullptr);
    if (held_in.cols() > 0) {
      detail::Batch held{held_in, held_tg};
      report.heldout_loss[epoch] =
          detail::loss_and_gradients(model, held, nullptr);
    } else {
      report.heldout_loss[epoch] = report.train_loss[epoch];
    }
  }
  report.final_train_accuracy = detail::accuracy(model, train_in, train_cls);
  report.final_heldout_accuracy =
      held_in.cols() > 0 ? detail::accuracy(model, held_in, held_cls)
                         : report.final_train_accuracy;
  return {std::move(model), std::move(report)};
}

}  // namespace crsense

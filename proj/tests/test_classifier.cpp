#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "crsense/classifier.hpp"
#include "oracles.hpp"

using namespace crsense;

namespace {

FeatureVector make_sample(std::initializer_list<double> values,
                          HypothesisLabel label) {
  FeatureVector f;
  f.values.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) f.values[i++] = v;
  f.label = label;
  return f;
}

/// Two well-separated Gaussian blobs per class in 2-D.
std::vector<FeatureVector> separable_blobs(int per_class, std::uint64_t seed) {
  auto rng = make_engine(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  const double centers[3][2] = {{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}};
  const HypothesisLabel labels[3] = {HypothesisLabel::H0_Hole,
                                     HypothesisLabel::H1_PU,
                                     HypothesisLabel::H2_PUE};
  std::vector<FeatureVector> data;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per_class; ++i)
      data.push_back(make_sample(
          {centers[c][0] + noise(rng), centers[c][1] + noise(rng)},
          labels[c]));
  return data;
}

ClassifierModel random_model(const NetworkShape& shape, std::uint64_t seed) {
  auto model = init_model(shape, seed);
  model.class_map = {HypothesisLabel::H0_Hole, HypothesisLabel::H1_PU,
                     HypothesisLabel::H2_PUE};
  model.class_map.resize(static_cast<std::size_t>(shape.output_dim),
                         HypothesisLabel::H3_Jammer);
  return model;
}

}  // namespace

TEST_CASE("init_model determinism and shapes") {
  NetworkShape shape{200, 64, 3};
  const auto a = init_model(shape, 5);
  const auto b = init_model(shape, 5);
  CHECK((a.w1 - b.w1).norm() == 0.0);
  CHECK((a.w2 - b.w2).norm() == 0.0);
  CHECK(a.w1.rows() == 64);
  CHECK(a.w1.cols() == 200);
  CHECK(a.w2.rows() == 3);
  CHECK(a.w2.cols() == 64);

  const auto tiny = init_model(NetworkShape{1, 1, 1}, 0);
  CHECK(tiny.w1.size() == 1);

  CHECK_THROWS_AS(init_model(NetworkShape{0, 1, 1}, 0),
                  std::invalid_argument);
}

TEST_CASE("zero model scores one half everywhere") {
  NetworkShape shape{4, 3, 3};
  auto model = random_model(shape, 1);
  model.w1.setZero();
  model.b1.setZero();
  model.w2.setZero();
  model.b2.setZero();
  const auto s = forward(model, RealSequence::Ones(4));
  for (int i = 0; i < 3; ++i) CHECK(s[i] == 0.5);
}

TEST_CASE("scores always land strictly inside (0,1)") {
  NetworkShape shape{6, 5, 3};
  const auto model = random_model(shape, 2);
  auto rng = make_engine(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 20; ++t) {
    RealSequence f(6);
    for (int i = 0; i < 6; ++i) f[i] = u(rng);
    const auto s = forward(model, f);
    for (int i = 0; i < 3; ++i) {
      CHECK(s[i] > 0.0);
      CHECK(s[i] < 1.0);
    }
  }
}

TEST_CASE("forward matches the scalar-loop oracle") {
  NetworkShape shape{9, 7, 3};
  auto model = random_model(shape, 4);
  auto rng = make_engine(5);
  std::normal_distribution<double> g(0.0, 2.0);
  model.feature_stats.mean = RealSequence::NullaryExpr(9, [&](Eigen::Index) {
    return g(rng);
  });
  model.feature_stats.stddev = RealSequence::Constant(9, 1.7);
  for (int t = 0; t < 10; ++t) {
    RealSequence f(9);
    for (int i = 0; i < 9; ++i) f[i] = g(rng);
    const RealSequence fast = forward(model, f);
    const RealSequence slow = oracles::naive_forward(model, f);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(forward(model, RealSequence::Ones(8)),
                  std::invalid_argument);
}

TEST_CASE("predict argmax and tie-breaking") {
  NetworkShape shape{2, 2, 3};
  auto model = random_model(shape, 6);
  // Zero network gives an exact three-way tie at 0.5 -> class 0.
  model.w1.setZero();
  model.b1.setZero();
  model.w2.setZero();
  model.b2.setZero();
  const auto tie = predict(model, RealSequence::Ones(2));
  CHECK(tie.label == HypothesisLabel::H0_Hole);

  // Bias one output up: argmax follows it.
  model.b2[1] = 3.0;
  const auto one = predict(model, RealSequence::Ones(2));
  CHECK(one.label == HypothesisLabel::H1_PU);
}

TEST_CASE("backprop gradients match central finite differences") {
  auto rng = make_engine(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    NetworkShape shape{5 + trial, 4, 3};
    auto model = random_model(shape, 100 + static_cast<std::uint64_t>(trial));
    detail::Batch batch;
    const int b = 6;
    batch.inputs.resize(shape.input_dim, b);
    batch.targets = RealMatrix::Zero(3, b);
    for (int j = 0; j < b; ++j) {
      for (int i = 0; i < shape.input_dim; ++i) batch.inputs(i, j) = g(rng);
      batch.targets(j % 3, j) = 1.0;
    }
    detail::Gradients grads;
    detail::loss_and_gradients(model, batch, &grads);

    const double h = 1e-5;
    auto check_param = [&](double* p, double analytic) {
      const double saved = *p;
      *p = saved + h;
      const double up = detail::loss_and_gradients(model, batch, nullptr);
      *p = saved - h;
      const double down = detail::loss_and_gradients(model, batch, nullptr);
      *p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({1e-4, std::abs(analytic),
                                     std::abs(numeric)});
      CHECK(std::abs(analytic - numeric) / denom <= 1e-5);
    };
    for (int i = 0; i < model.w1.size(); ++i)
      check_param(model.w1.data() + i, grads.w1(i));
    for (int i = 0; i < model.b1.size(); ++i)
      check_param(model.b1.data() + i, grads.b1(i));
    for (int i = 0; i < model.w2.size(); ++i)
      check_param(model.w2.data() + i, grads.w2(i));
    for (int i = 0; i < model.b2.size(); ++i)
      check_param(model.b2.data() + i, grads.b2(i));
  }
}

TEST_CASE("separable blobs reach 99 percent training accuracy") {
  const auto data = separable_blobs(60, 8);
  TrainOptions opt;
  opt.epochs = 200;
  opt.seed = 9;
  const auto [model, report] = train(data, NetworkShape{2, 8, 3}, opt);
  CHECK(report.final_train_accuracy >= 0.99);
}

TEST_CASE("zero learning rate leaves the weights untouched") {
  const auto data = separable_blobs(10, 10);
  TrainOptions opt;
  opt.epochs = 5;
  opt.learning_rate = 0.0;
  opt.seed = 11;
  const auto [model, report] = train(data, NetworkShape{2, 4, 3}, opt);
  const auto fresh =
      init_model(NetworkShape{2, 4, 3},
                 derive_seed(opt.seed, SeedStream::ClassifierInit));
  CHECK((model.w1 - fresh.w1).norm() == 0.0);
  CHECK((model.b1 - fresh.b1).norm() == 0.0);
  CHECK((model.w2 - fresh.w2).norm() == 0.0);
  CHECK((model.b2 - fresh.b2).norm() == 0.0);
}

TEST_CASE("small learning rate gives a non-increasing loss curve") {
  const auto data = separable_blobs(30, 12);
  TrainOptions opt;
  opt.epochs = 60;
  opt.learning_rate = 1e-3;
  opt.momentum = 0.0;
  opt.seed = 13;
  const auto [model, report] = train(data, NetworkShape{2, 6, 3}, opt);
  for (int e = 1; e < opt.epochs; ++e)
    CHECK(report.train_loss[e] <= report.train_loss[e - 1] * 1.01);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = separable_blobs(20, 14);
  TrainOptions opt;
  opt.epochs = 30;
  opt.seed = 15;
  const auto [m1, r1] = train(data, NetworkShape{2, 5, 3}, opt);
  const auto [m2, r2] = train(data, NetworkShape{2, 5, 3}, opt);
  CHECK((m1.w1 - m2.w1).norm() == 0.0);
  CHECK((m1.w2 - m2.w2).norm() == 0.0);
  CHECK((r1.train_loss - r2.train_loss).norm() == 0.0);
}

TEST_CASE("predictions are invariant to positive affine feature rescaling "
          "given refit feature stats") {
  const auto data = separable_blobs(40, 16);
  TrainOptions opt;
  opt.epochs = 120;
  opt.seed = 17;
  const auto [model, report] = train(data, NetworkShape{2, 6, 3}, opt);

  // Rescale every raw feature and refit only the normalization statistics;
  // the rescaling must cancel out of the standardized inputs.
  const double scale[2] = {12.5, 0.04};
  const double shift[2] = {-3.0, 7.0};
  auto model2 = model;
  for (int i = 0; i < 2; ++i) {
    model2.feature_stats.mean[i] =
        scale[i] * model.feature_stats.mean[i] + shift[i];
    model2.feature_stats.stddev[i] = scale[i] * model.feature_stats.stddev[i];
  }

  auto rng = make_engine(18);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    RealSequence probe(2), probe2(2);
    for (int i = 0; i < 2; ++i) {
      probe[i] = u(rng);
      probe2[i] = scale[i] * probe[i] + shift[i];
    }
    CHECK(predict(model, probe).label == predict(model2, probe2).label);
  }
}

TEST_CASE("train input validation") {
  CHECK_THROWS_AS(train({}, NetworkShape{2, 4, 3}, TrainOptions{}),
                  std::invalid_argument);

  // Missing class: only two labels present for a 3-class shape.
  std::vector<FeatureVector> two;
  for (int i = 0; i < 10; ++i) {
    two.push_back(make_sample({0.0, 0.1 * i}, HypothesisLabel::H0_Hole));
    two.push_back(make_sample({1.0, 0.1 * i}, HypothesisLabel::H1_PU));
  }
  CHECK_THROWS_AS(train(two, NetworkShape{2, 4, 3}, TrainOptions{}),
                  std::invalid_argument);
}

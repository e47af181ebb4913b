#include "chsh/ml.hpp"
#include "chsh/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chsh;
using namespace chsh::ml;

namespace {

Eigen::MatrixXd random_inputs(int rows, int cols, CounterRng& rng) {
  std::normal_distribution<double> g;
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return g(rng); });
}

// Largest relative error between the analytic gradient and central differences.
double gradient_error(MlpModel m, const Eigen::MatrixXd& x, const std::vector<int>& y, const LossSpec& spec) {
  const auto g = mlp_gradient(m, x, y, spec);
  const double h = 1e-5;
  double worst = 0;
  auto check = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = mlp_loss(m, x, y, spec);
    param = keep - h;
    const double down = mlp_loss(m, x, y, spec);
    param = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (Eigen::Index i = 0; i < m.layers[l].W.size(); ++i) check(m.layers[l].W.data()[i], g.grads[l].W.data()[i]);
    for (Eigen::Index i = 0; i < m.layers[l].b.size(); ++i) check(m.layers[l].b[i], g.grads[l].b[i]);
  }
  return worst;
}

std::vector<LabelledPoint> corr4_data(int n, std::uint64_t seed) {
  return sampling::sample_uniform(Space::Corr4, n, sampling::make_oracle("tlm"), false, seed);
}

}  // namespace

TEST_CASE("focal loss") {
  CHECK(focal_loss(1.0) == doctest::Approx(0));
  CHECK(focal_loss(0.5) == doctest::Approx(-1e-2 * 0.25 * std::log(0.5)));
  CHECK(std::isfinite(focal_loss(0.0)));
  CHECK(focal_loss(0.0) == doctest::Approx(-1e-2 * std::log(kProbabilityFloor)));
  CHECK_THROWS_AS(FocalLossParams({-1, 2}).validate(), DomainError);
}

TEST_CASE("balanced metrics") {
  CHECK(balanced_accuracy({1, 1, 0, 0}, {1, 0, 0, 0}) == doctest::Approx((1.0 + 2.0 / 3) / 2));
  CHECK_THROWS_AS(balanced_accuracy({1, 1}, {1, 1}), SingleClassBatch);
  const auto m = compute_metrics({1, 1, 0, 0}, {1, 0, 1, 0});
  CHECK(m.accuracy == doctest::Approx(0.5));
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.5));
  // Both classes weigh the same however rare one of them is.
  const double bce = balanced_bce({0.9, 0.9, 0.9, 0.2}, {1, 1, 1, 0});
  CHECK(bce == doctest::Approx((-std::log(0.9) - std::log(0.8)) / 2));
}

TEST_CASE("softmax outputs are distributions") {
  CounterRng rng(1);
  for (bool convex : {false, true}) {
    const auto m = init_mlp({4, 64, 16, 4, 2}, convex, rng);
    const auto p = m.probabilities(random_inputs(200, 4, rng) * 10);
    CHECK((p.array() >= 0).all());
    CHECK(((p.rowwise().sum().array() - 1).abs() < 1e-12).all());
  }
}

TEST_CASE("gradient matches central differences") {
  CounterRng rng(2);
  const auto x = random_inputs(24, 4, rng);
  std::vector<int> y(24);
  for (int i = 0; i < 24; ++i) y[i] = i % 3 == 0;
  for (bool convex : {false, true}) {
    const auto m = init_mlp({4, 8, 5, 3, 2}, convex, rng);
    CHECK(gradient_error(m, x, y, {LossKind::Focal, {0.25, 2}, 1, 1}) <= 1e-4);
    CHECK(gradient_error(m, x, y, {LossKind::BalancedBce, {}, 1.5, 0.75}) <= 1e-4);
  }
}

TEST_CASE("convex model logits are convex") {
  CounterRng rng(3);
  auto m = init_mlp({4, 64, 16, 4, 2}, true, rng);
  for (std::size_t l = 1; l < m.layers.size(); ++l) CHECK((m.layers[l].W.array() >= 0).all());
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const auto pts = random_inputs(2, 4, rng);
    const double t = u(rng);
    Eigen::MatrixXd mid = t * pts.row(0) + (1 - t) * pts.row(1);
    const auto lm = m.logits(mid);
    const auto lp = m.logits(pts);
    for (int c = 0; c < 2; ++c) CHECK(lm(0, c) <= t * lp(0, c) + (1 - t) * lp(1, c) + 1e-12);
  }
}

TEST_CASE("dataset split") {
  const auto pts = corr4_data(1000, 4);
  const auto a = split_dataset(pts, 9);
  const auto b = split_dataset(pts, 9);
  CHECK(a.train.size() == 700);
  CHECK(a.validation.size() == 150);
  CHECK(a.test.size() == 150);
  CHECK(features(a.train) == features(b.train));
  CHECK_THROWS_AS(split_dataset(pts, 1, 0.9, 0.2), DomainError);
}

TEST_CASE("grouped split keeps consecutive runs in one part") {
  const auto pts = corr4_data(1000, 4);
  const auto s = split_dataset(pts, 3, 0.70, 0.15, 2);
  CHECK(s.train.size() + s.validation.size() + s.test.size() == 1000);
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    REQUIRE(part->size() % 2 == 0);
    for (std::size_t i = 0; i < part->size(); i += 2) {
      bool paired = false;
      for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
        if (pts[k].b.coords() == (*part)[i].b.coords()) paired = pts[k + 1].b.coords() == (*part)[i + 1].b.coords();
      }
      CHECK(paired);
    }
  }
  CHECK_THROWS_AS(split_dataset(pts, 3, 0.70, 0.15, 3), DomainError);
}

TEST_CASE("smo satisfies the dual optimality conditions") {
  const auto pts = corr4_data(600, 5);
  const auto x = features(pts);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = pts[i].label == 1 ? 1 : -1;
  for (double C : {1.0, 100.0}) {
    const auto r = smo(x, y, C, 1.0);
    CHECK(kkt_violation(x, y, r, C, 1.0) <= 1e-3);
    CHECK((r.alpha.array() >= 0).all());
    CHECK((r.alpha.array() <= C).all());
    CHECK(std::abs(r.alpha.dot(y)) < 1e-9 * C * y.size());
  }
}

TEST_CASE("svm learns the correlation-space boundary") {
  const auto data = split_dataset(corr4_data(2000, 6), 1);
  std::vector<GridCell> cells;
  const auto svm = train_svm(data, {{10, 100}, {1}}, 2, &cells);
  CHECK(cells.size() == 2);
  std::vector<int> preds;
  for (const auto& p : data.test) preds.push_back(predict(svm, p.b).label);
  CHECK(compute_metrics(preds, labels(data.test)).accuracy > 0.95);
}

TEST_CASE("mlp training improves on the majority class") {
  const auto data = split_dataset(corr4_data(3000, 7), 2);
  MlpConfig cfg;
  cfg.restarts = 2;
  cfg.maxEpochs = 40;
  cfg.seed = 3;
  cfg.threads = 2;
  const auto m = train_mlp(data, cfg);
  CHECK(m.meta.epochs > 0);
  std::vector<int> preds;
  for (const auto& p : data.test) preds.push_back(predict(Model{m}, p.b).label);
  CHECK(compute_metrics(preds, labels(data.test)).accuracy > 0.93);
}

TEST_CASE("model serialisation") {
  CounterRng rng(4);
  const Model mlp = init_mlp({4, 6, 2}, true, rng);
  const auto data = split_dataset(corr4_data(300, 8), 3);
  const Model svm = train_svm(data, {{10}, {1}});
  for (const auto& m : {mlp, svm}) {
    const auto back = model_from_json(model_to_json(m));
    for (const auto& p : data.test) {
      CHECK(predict(back, p.b).score == predict(m, p.b).score);
    }
  }
  CHECK_THROWS_AS(predict(mlp, Behaviour::pr_box()), DomainError);
  CHECK_THROWS(model_from_json(R"({"format":"chshml-model","version":99,"kind":"mlp"})"));
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}

TEST_CASE("composite prediction") {
  CounterRng rng(5);
  const Model m = init_mlp({8, 4, 2}, false, rng);
  // Local points are quantum whatever the model says.
  CHECK(composite_full8_predict(m, Behaviour::origin(Space::Full8)) == 1);
}

#include "chsh/seesaw.hpp"
#include "chsh/error.hpp"
#include "chsh/npa.hpp"
#include "chsh/sampling.hpp"

#include <doctest.h>

#include <numbers>

using namespace chsh;
using namespace chsh::seesaw;

TEST_CASE("Tsirelson realisation") {
  const auto r = tsirelson_realization();
  CHECK_NOTHROW(r.validate());
  const auto b = behaviour_of(r);
  CHECK((b.coords() - Behaviour::tsirelson(Space::Full8).coords()).norm() < 1e-12);
  CHECK(distance(r, Behaviour::tsirelson(Space::Corr4)) < 1e-12);
}

TEST_CASE("embedding keeps the behaviour") {
  const auto r = tsirelson_realization();
  for (int d : {3, 4, 6}) {
    const auto e = embed(r, d);
    CHECK(e.d == d);
    CHECK_NOTHROW(e.validate());
    CHECK((behaviour_of(e).coords() - behaviour_of(r).coords()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(embed(r, 1), DomainError);
}

TEST_CASE("random observables are unitary involutions") {
  CounterRng rng(9);
  for (int d : {2, 3, 5}) {
    const auto o = random_observable(d, rng);
    CHECK((o - o.adjoint()).norm() < 1e-12);
    CHECK((o * o - CMatrix::Identity(d, d)).norm() < 1e-10);
    const double tr = o.trace().real();
    CHECK(std::abs(tr) < d - 0.5);  // both eigenvalues present
  }
}

TEST_CASE("state step is optimal for the Tsirelson observables") {
  const auto r = tsirelson_realization();
  const auto s = optimize_state(r.alice, r.bob, Behaviour::tsirelson(Space::Full8));
  CHECK(s.distance < 1e-6);
  CHECK(s.rho.trace().real() == doctest::Approx(1));
}

TEST_CASE("sweeps never increase the distance") {
  CounterRng rng(4);
  const auto pts = sampling::hit_and_run(ns_system(Space::Full8), Eigen::VectorXd::Zero(8), 3, rng);
  SeesawConfig cfg;
  cfg.d = 2;
  cfg.maxSweeps = 40;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> history;
    const Behaviour target(Space::Full8, pts[i]);
    const auto r = seesaw_seed(target, cfg, CounterRng(i), history);
    REQUIRE_FALSE(history.empty());
    for (std::size_t k = 1; k < history.size(); ++k) CHECK(history[k] <= history[k - 1] + 1e-15);
    CHECK(distance(r, target) == doctest::Approx(history.back()).epsilon(1e-9));
  }
}

TEST_CASE("Tsirelson point is reached in dimension 2") {
  SeesawConfig cfg;
  cfg.d = 2;
  cfg.seeds = 50;
  const auto v = steered_seesaw(Behaviour::tsirelson(Space::Full8), cfg, CounterRng(1));
  CHECK(v.status == VerdictStatus::InQdd);
  CHECK(v.bestDistance < 1e-7);
  CHECK(v.seedsTried <= 50);
  for (std::size_t k = 1; k < v.bestSeedHistory.size(); ++k) CHECK(v.bestSeedHistory[k] <= v.bestSeedHistory[k - 1]);
}

TEST_CASE("PR box stays inconclusive") {
  SeesawConfig cfg;
  cfg.d = 2;
  cfg.seeds = 3;
  cfg.maxSweeps = 50;
  const auto v = steered_seesaw(Behaviour::pr_box(), cfg, CounterRng(2));
  CHECK(v.status == VerdictStatus::Inconclusive);
  // The nearest quantum point is the Tsirelson box at distance 2 - sqrt 2.
  CHECK(v.bestDistance >= 2 - std::numbers::sqrt2 - 1e-6);
}

TEST_CASE("larger dimension does no worse from an embedded start") {
  const auto target = Behaviour::tsirelson(Space::Full8).scaled(0.9);
  SeesawConfig cfg;
  cfg.d = 2;
  cfg.seeds = 1;
  cfg.maxSweeps = 30;
  std::vector<double> h2;
  const auto r2 = seesaw_seed(target, cfg, CounterRng(0), h2);
  const auto e = embed(r2, 3);
  CHECK(distance(e, target) == doctest::Approx(distance(r2, target)).epsilon(1e-10));
  const auto s = optimize_state(e.alice, e.bob, target);
  CHECK(s.distance <= distance(e, target) + 1e-7);
}

TEST_CASE("see-saw is deterministic") {
  CounterRng rng(6);
  const auto x = sampling::hit_and_run(ns_system(Space::Full8), Eigen::VectorXd::Zero(8), 1, rng).front();
  const Behaviour target(Space::Full8, x);
  SeesawConfig cfg;
  cfg.seeds = 2;
  cfg.maxSweeps = 20;
  const auto a = steered_seesaw(target, cfg, CounterRng(8));
  const auto b = steered_seesaw(target, cfg, CounterRng(8));
  CHECK(a.bestDistance == b.bestDistance);
  CHECK(a.seedUsed == b.seedUsed);
  CHECK(a.bestSeedHistory == b.bestSeedHistory);
}

TEST_CASE("input validation") {
  SeesawConfig cfg;
  cfg.d = 9;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.d = 1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK_THROWS_AS(steered_seesaw(Behaviour::pr_box().scaled(1.1), SeesawConfig{}, CounterRng(0)), DomainError);
}

TEST_CASE("round protocol does not depend on the thread count") {
  std::vector<Behaviour> pts{Behaviour::tsirelson(Space::Full8), Behaviour::origin(Space::Full8),
                             Behaviour::tsirelson(Space::Full8).scaled(0.95)};
  RoundOptions o;
  o.seed = 12;
  o.maxSweeps = 30;
  const std::vector<RoundSpec> schedule{{2, 2}, {3, 1}};
  const auto a = round_protocol(pts, schedule, o);
  o.threads = 3;
  const auto b = round_protocol(pts, schedule, o);
  REQUIRE(a.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.points[i].round == b.points[i].round);
    CHECK(a.points[i].distance == b.points[i].distance);
  }
  CHECK(a.points[1].round == 1);  // rounds count from 1
  CHECK(a.rounds.size() == 2);
}

#include "chsh/geometry.hpp"
#include "chsh/error.hpp"
#include "chsh/rng.hpp"
#include "chsh/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chsh;

TEST_CASE("named behaviours") {
  const auto pr = Behaviour::pr_box();
  CHECK(pr.space() == Space::Full8);
  CHECK(chsh_value(pr, ChshVariant::canonical()) == doctest::Approx(4));
  CHECK(chsh_value(Behaviour::tsirelson(Space::Corr4), ChshVariant::canonical()) ==
        doctest::Approx(2 * std::numbers::sqrt2));
  CHECK(local_membership(Behaviour::origin(Space::Full8)));
  CHECK_FALSE(local_membership(pr));
  CHECK_FALSE(local_membership(Behaviour::tsirelson(Space::Full8)));
}

TEST_CASE("tlm margin sign") {
  CHECK(tlm_margin(Behaviour::origin(Space::Corr4)) == doctest::Approx(-std::numbers::pi));
  CHECK(std::abs(tlm_margin(Behaviour::tsirelson(Space::Corr4))) < 1e-12);
  CHECK(tlm_margin(Behaviour::pr_box()) == doctest::Approx(std::numbers::pi));
  CHECK(tlm_satisfied(Behaviour::tsirelson(Space::Full8)));
  CHECK_FALSE(tlm_satisfied(Behaviour::tsirelson(Space::Corr4).scaled(1.001)));
  CHECK_THROWS_AS(tlm_margin(Behaviour(Space::Corr4, Eigen::Vector4d(1.5, 0, 0, 0))), DomainError);
}

TEST_CASE("non-signalling polytope") {
  const auto c4 = ns_system(Space::Corr4);
  const auto f8 = ns_system(Space::Full8);
  CHECK(c4.rows() == 8);
  CHECK(f8.rows() == 16);
  CHECK((f8.offsets.array() == 1.0).all());
  CHECK(in_ns(Behaviour::pr_box()));
  CHECK_FALSE(in_ns(Behaviour::pr_box().scaled(1.01)));
  for (const auto& v : deterministic_vertices()) {
    CHECK(in_ns(v));
    CHECK(local_membership(v));
  }
}

TEST_CASE("deterministic vertices") {
  const auto vs = deterministic_vertices();
  CHECK(vs.size() == 16);
  for (const auto& v : vs) CHECK(std::abs(chsh_value(v, ChshVariant::canonical())) == doctest::Approx(2));
  const auto sat = saturating_vertices();
  CHECK(sat.size() == 8);
  for (const auto& v : sat) CHECK(chsh_value(v, ChshVariant::canonical()) == doctest::Approx(2));
}

TEST_CASE("probabilities are normalised and non-negative on ns points") {
  CounterRng rng(11);
  const auto pts = sampling::hit_and_run(ns_system(Space::Full8), Eigen::VectorXd::Zero(8), 200, rng);
  for (const auto& x : pts) {
    const Behaviour b(Space::Full8, x);
    for (int xs = 0; xs < 2; ++xs) {
      for (int ys = 0; ys < 2; ++ys) {
        double sum = 0;
        for (int a = 0; a < 2; ++a) {
          for (int bb = 0; bb < 2; ++bb) {
            CHECK(b.probability(a, bb, xs, ys) >= -1e-12);
            sum += b.probability(a, bb, xs, ys);
          }
        }
        CHECK(sum == doctest::Approx(1));
      }
    }
  }
}

TEST_CASE("space conversions") {
  const auto t = Behaviour::tsirelson(Space::Corr4);
  const auto f = t.to_full8();
  CHECK(f.dim() == 8);
  CHECK(f.coords().head<4>().norm() == 0);
  CHECK((f.to_corr4().coords() - t.coords()).norm() == 0);
  CHECK(parse_space("corr4") == Space::Corr4);
  CHECK(parse_space("full8") == Space::Full8);
  CHECK_THROWS_AS(parse_space("full9"), DomainError);
  CHECK_THROWS_AS(Behaviour(Space::Corr4, Eigen::VectorXd::Zero(8)), DomainError);
}

TEST_CASE("relabelling") {
  CounterRng rng(3);
  const auto pts = sampling::hit_and_run(ns_system(Space::Full8), Eigen::VectorXd::Zero(8), 100, rng);
  for (const auto v : ChshVariant::all()) {
    CHECK(chsh_value(pr_box(v), v) == doctest::Approx(4));
    for (const auto& x : pts) {
      const Behaviour b(Space::Full8, x);
      const auto r = relabel(b, v);
      CHECK((relabel(r, v).coords() - b.coords()).norm() < 1e-14);
      CHECK(chsh_value(r, v) == doctest::Approx(chsh_value(b, ChshVariant::canonical())));
      CHECK(local_membership(r) == local_membership(b));
      CHECK(tlm_margin(r) == doctest::Approx(tlm_margin(b)));
    }
  }
}

TEST_CASE("dominant variant") {
  for (const auto v : ChshVariant::all()) CHECK(dominant_variant(pr_box(v)) == v);
}

TEST_CASE("local membership rejects signalling input") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
  x[0] = 1;
  x[2] = 1;
  x[4] = -1;  // p(-1,-1|0,0) = -1/2
  CHECK_THROWS_AS(local_membership(Behaviour(Space::Full8, x)), NotNonSignalling);
}

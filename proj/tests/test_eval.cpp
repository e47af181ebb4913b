#include "chsh/eval.hpp"
#include "chsh/error.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace chsh;
using namespace chsh::eval;

TEST_CASE("named slices are orthonormal planes") {
  for (const char* name : {"slice1", "slice2", "full8"}) {
    const auto s = named_slice(name, 11);
    CHECK_NOTHROW(s.validate());
    CHECK(s.name == name);
  }
  CHECK_THROWS_AS(named_slice("slice3"), DomainError);
  auto bad = slice_pr_pair(11);
  bad.e2 = bad.e1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("slice coordinates of named points") {
  const auto s1 = slice_pr_pair();
  CHECK((s1.point(2, 0) - Behaviour::pr_box().to_corr4().coords()).norm() < 1e-14);
  const auto s2 = slice_equal_correlators();
  const double u = std::sqrt(3.0) / std::sqrt(2.0), v = -1 / std::sqrt(2.0);
  CHECK((s2.point(u, v) - Behaviour::tsirelson(Space::Corr4).coords()).norm() < 1e-14);
}

TEST_CASE("slice grid") {
  const auto spec = slice_pr_pair(21);
  const auto truth = oracle_classifier(sampling::make_oracle("tlm"));
  const auto grid = slice_grid(spec, truth, 2);
  CHECK(grid.size() == 21 * 21);
  CHECK(grid.front().u == -2);
  CHECK(grid.front().v == -2);
  CHECK(grid[1].u > grid[0].u);
  for (const auto& p : grid) {
    if (!p.inNs) CHECK(p.label == -1);
  }
  CHECK(slice_accuracy(spec, truth, truth) == 1.0);
  const Classifier always = [](const Behaviour&) { return 1; };
  CHECK(slice_accuracy(spec, always, truth) < 1.0);
  std::ostringstream out;
  write_slice_csv(grid, out);
  CHECK(out.str().rfind("u,v,label\n", 0) == 0);
}

TEST_CASE("volume ratio") {
  const auto pts = volume_points("uniform", Space::Corr4, 5000, 2);
  const auto r = volume_ratio(pts, sampling::make_oracle("tlm"), 2);
  CHECK(r.n == 5000);
  CHECK(r.ratio == doctest::Approx(0.925).epsilon(0.03));
  CHECK(r.stderr_ == doctest::Approx(std::sqrt(r.ratio * (1 - r.ratio) / 5000)));
  CHECK(r.meanTimePerPoint >= 0);
  CHECK_THROWS_AS(volume_points("simplex", Space::Corr4, 10, 1), DomainError);
  CHECK_THROWS_AS(volume_points("sphere", Space::Full8, 10, 1), DomainError);
  const auto simplex = volume_points("simplex", Space::Full8, 200, 3);
  CHECK(volume_ratio(simplex, sampling::make_oracle("local")).ratio == 0);
}

TEST_CASE("spread test of the exact oracle") {
  const auto c = oracle_classifier(sampling::make_oracle("tlm"));
  CHECK(spread_test(c, Space::Corr4, npa::NpaLevel::pure(1), 1e-2, 300, 4) == 1.0);
}

TEST_CASE("full report") {
  SuiteConfig cfg;
  cfg.test = sampling::sample_uniform(Space::Corr4, 400, sampling::make_oracle("tlm"), true, 5);
  cfg.sigmas = {1e-2};
  cfg.spreadPoints = 200;
  cfg.slices = {"slice1"};
  cfg.sliceResolution = 15;
  cfg.truth = oracle_classifier(sampling::make_oracle("tlm"));
  const auto rep = full_report(cfg.truth, cfg);
  CHECK(rep.overall.accuracy == 1.0);
  CHECK(rep.perSuite.at("slice_slice1") == 1.0);
  CHECK(rep.perSuite.at("spread_0.01") == 1.0);
  CHECK(report_json(rep).find("\"perSuite\"") != std::string::npos);
  cfg.truth = nullptr;
  CHECK_THROWS_AS(full_report(oracle_classifier(sampling::make_oracle("tlm")), cfg), DomainError);
}

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5        run criteria 3 and 5

#include "chsh/eval.hpp"
#include "chsh/geometry.hpp"
#include "chsh/ml.hpp"
#include "chsh/npa.hpp"
#include "chsh/parallel.hpp"
#include "chsh/sampling.hpp"
#include "chsh/sdp.hpp"
#include "chsh/seesaw.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace chsh;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const unsigned kThreads = default_threads();

std::vector<sampling::LabelledPoint> uniform_corr4(int n, std::uint64_t seed) {
  return sampling::sample_uniform(Space::Corr4, n, sampling::make_oracle("tlm"), false, seed, kThreads);
}

double accuracy(const eval::Classifier& c, const std::vector<sampling::LabelledPoint>& pts) {
  std::vector<int> hit(pts.size());
  parallel_for(pts.size(), kThreads, [&](std::size_t i) { hit[i] = c(pts[i].b) == pts[i].label; });
  int s = 0;
  for (int h : hit) s += h;
  return static_cast<double>(s) / static_cast<double>(pts.size());
}

// ---- 1
Outcome tsirelson_bound() {
  const auto t0 = Clock::now();
  const double v4 = npa::max_functional(chsh_functional(Space::Corr4, ChshVariant::canonical()), Space::Corr4,
                                        npa::NpaLevel::pure(1));
  const double v8 = npa::max_functional(chsh_functional(Space::Full8, ChshVariant::canonical()), Space::Full8,
                                        npa::NpaLevel::pure(1));
  const double t = since(t0);
  const double target = 2 * std::numbers::sqrt2;
  const double err = std::max(std::abs(v4 - target), std::abs(v8 - target));
  return {err <= 1e-6 && t < 1.0, fmt("corr4 %.10f full8 %.10f |err| %.2e in %.3f s", v4, v8, err, t)};
}

// ---- 2
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  CounterRng rng(2);
  const auto xs = sampling::hit_and_run(ns_system(Space::Corr4), Eigen::VectorXd::Zero(4), 10000, rng);
  std::vector<int> compared(xs.size()), disagree(xs.size());
  parallel_for(xs.size(), kThreads, [&](std::size_t i) {
    const Behaviour b(Space::Corr4, xs[i]);
    if (std::abs(tlm_margin(b)) <= 1e-6) return;
    compared[i] = 1;
    disagree[i] = npa::is_member(b, npa::NpaLevel::pure(1)) != tlm_satisfied(b);
  });
  int c = 0, d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c += compared[i];
    d += disagree[i];
  }
  const double t = since(t0);
  return {d == 0 && t < 600, fmt("%d disagreements over %d points with |margin| > 1e-6 in %.1f s", d, c, t)};
}

// ---- 3
Outcome quantum_volume() {
  const auto t0 = Clock::now();
  const auto pts = eval::volume_points("uniform", Space::Corr4, 100000, 3);
  const auto r = eval::volume_ratio(pts, sampling::make_oracle("tlm"), kThreads);
  const double t = since(t0);
  return {std::abs(r.ratio - 0.925) <= 0.01 && t < 60,
          fmt("ratio %.5f +- %.5f (target 0.925 +- 0.01) in %.1f s", r.ratio, r.stderr_, t)};
}

// ---- 4
Outcome local_volume() {
  const auto pts = eval::volume_points("uniform", Space::Full8, 100000, 4);
  const auto r = eval::volume_ratio(pts, sampling::make_oracle("local"), kThreads);
  const double share = (1 - r.ratio) / 8;
  return {std::abs(r.ratio - 0.9412) <= 0.01 && std::abs(share - 0.0074) <= 0.001,
          fmt("local ratio %.5f (target 0.9412 +- 0.01), simplex share %.5f (target 0.0074 +- 0.001)", r.ratio,
              share)};
}

// ---- 5
Outcome facet_acceptance() {
  const int n = 1000000;
  const int chunks = 100;
  std::vector<int> kept(chunks);
  parallel_for(chunks, kThreads, [&](std::size_t c) {
    CounterRng rng = CounterRng(5).fork(c);
    for (int i = 0; i < n / chunks; ++i) kept[c] += sampling::exits_through_canonical_facet(sampling::random_direction(8, rng));
  });
  int k = 0;
  for (int x : kept) k += x;
  const double rate = static_cast<double>(k) / n;
  return {std::abs(rate - 0.0021) <= 0.0005, fmt("%d of %d directions accepted: %.4f%% (target 0.21%% +- 0.05%%)", k, n,
                                                   100 * rate)};
}

// ---- 6
Outcome seesaw_soundness() {
  const auto t0 = Clock::now();
  seesaw::SeesawConfig cfg;
  cfg.d = 2;
  cfg.seeds = 50;
  const auto ts = seesaw::steered_seesaw(Behaviour::tsirelson(Space::Full8), cfg, CounterRng(6));
  cfg.d = 6;
  cfg.seeds = 5;
  const auto pr = seesaw::steered_seesaw(Behaviour::pr_box(), cfg, CounterRng(6));
  const double t = since(t0);
  const bool ok = ts.status == seesaw::VerdictStatus::InQdd && ts.bestDistance < 1e-7 &&
                  pr.status == seesaw::VerdictStatus::Inconclusive && t < 120;
  return {ok, fmt("Tsirelson d=2: %s at %.2e after %d seeds; PR d=6: %s at %.4f; %.1f s",
                  seesaw::to_string(ts.status).c_str(), ts.bestDistance, ts.seedsTried,
                  seesaw::to_string(pr.status).c_str(), pr.bestDistance, t)};
}

// ---- 7
Outcome appendix_a() {
  const auto t0 = Clock::now();
  const int n = 100;
  CounterRng dirRng(7);
  std::vector<Eigen::VectorXd> dirs;
  while (static_cast<int>(dirs.size()) < n) {
    auto u = sampling::random_direction(8, dirRng);
    if (sampling::exits_through_canonical_facet(u)) dirs.push_back(std::move(u));
  }
  seesaw::SeesawConfig cfg;
  cfg.d = 6;
  cfg.seeds = 50;
  const CounterRng base(70);
  std::vector<double> dist(n);
  parallel_for(dirs.size(), kThreads, [&](std::size_t i) {
    const double lambda = npa::max_lambda(dirs[i], Space::Full8, npa::NpaLevel::one_plus_ab());
    dist[i] = seesaw::steered_seesaw(Behaviour(Space::Full8, lambda * dirs[i]), cfg, base.fork(i)).bestDistance;
  });
  int below2 = 0, below3 = 0, below7 = 0;
  for (double d : dist) {
    below2 += d < 1e-2;
    below3 += d < 1e-3;
    below7 += d < 1e-7;
  }
  const double frac = static_cast<double>(below2) / n;
  return {frac >= 0.85 && frac <= 1.0, fmt("gap < 1e-2 for %d/%d (target fraction in [0.85, 1]); < 1e-3: %d; < 1e-7: %d; "
                                           "%.0f s",
                                           below2, n, below3, below7, since(t0))};
}

// ---- 8
Outcome svm_unbalanced() {
  const auto data = ml::split_dataset(uniform_corr4(10000, 8), 8);
  const ml::Model svm = ml::train_svm(data, {}, kThreads);
  const auto c = eval::model_classifier(svm);
  const double test = accuracy(c, data.test);
  const double spread = eval::spread_test(c, Space::Corr4, npa::NpaLevel::pure(1), 1e-3, 10000, 80, kThreads);
  const auto truth = eval::oracle_classifier(sampling::make_oracle("tlm"));
  const double slice = eval::slice_accuracy(eval::slice_pr_pair(), c, truth, kThreads);
  const bool ok = test >= 0.98 && spread >= 0.45 && spread <= 0.60 && slice >= 0.97;
  return {ok, fmt("test %.4f (>= 0.98), spread 1e-3 %.4f (in [0.45, 0.60]), slice1 %.4f (>= 0.97)", test, spread, slice)};
}

// ---- 9
Outcome svm_offset() {
  const auto pts = sampling::sample_offset(Space::Corr4, 10000, {1e-3, npa::NpaLevel::pure(1)}, 9, false, kThreads);
  const auto data = ml::split_dataset(pts, 9, 0.70, 0.15, 2);
  const ml::Model svm = ml::train_svm(data, {}, kThreads);
  const auto c = eval::model_classifier(svm);
  const double unbalanced = accuracy(c, uniform_corr4(10000, 90));
  const double spread = eval::spread_test(c, Space::Corr4, npa::NpaLevel::pure(1), 1e-2, 10000, 91, kThreads);
  return {unbalanced >= 0.98 && spread >= 0.85,
          fmt("unbalanced %.4f (>= 0.98), spread 1e-2 %.4f (>= 0.85)", unbalanced, spread)};
}

// ---- 10
Outcome mlp_unbalanced() {
  const auto data = ml::split_dataset(uniform_corr4(10000, 10), 10);
  ml::MlpConfig cfg;
  cfg.loss = ml::LossKind::Focal;
  cfg.focal = {1e-2, 2};
  cfg.restarts = 10;
  cfg.seed = 10;
  cfg.symmetryAugment = true;
  cfg.threads = kThreads;
  const ml::Model m = ml::train_mlp(data, cfg);
  const double test = accuracy(eval::model_classifier(m), data.test);
  return {test >= 0.98, fmt("test %.4f (>= 0.98), focal alpha 1e-2 gamma 2, best of %d restarts with the 8 relabellings",
                            test, cfg.restarts)};
}

// ---- 11
Outcome property_suite() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  std::normal_distribution<double> g;

  {  // gradient vs central differences
    CounterRng rng(11);
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(16, 4, [&] { return g(rng); });
    std::vector<int> y(16);
    for (int i = 0; i < 16; ++i) y[i] = i % 4 == 0;
    double worst = 0;
    for (bool convex : {false, true}) {
      for (auto kind : {ml::LossKind::Focal, ml::LossKind::BalancedBce}) {
        auto m = ml::init_mlp({4, 64, 16, 4, 2}, convex, rng);
        const ml::LossSpec spec{kind, {0.25, 2}, 1.3, 0.8};
        const auto grad = ml::mlp_gradient(m, x, y, spec);
        const double h = 1e-5;
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
          auto probe = [&](double& p, double analytic) {
            const double keep = p;
            p = keep + h;
            const double up = ml::mlp_loss(m, x, y, spec);
            p = keep - h;
            const double down = ml::mlp_loss(m, x, y, spec);
            p = keep;
            const double num = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(num - analytic) / std::max({std::abs(num), std::abs(analytic), 1e-6}));
          };
          for (Eigen::Index i = 0; i < m.layers[l].W.size(); ++i) probe(m.layers[l].W.data()[i], grad.grads[l].W.data()[i]);
          for (Eigen::Index i = 0; i < m.layers[l].b.size(); ++i) probe(m.layers[l].b[i], grad.grads[l].b[i]);
        }
      }
    }
    expect(worst <= 1e-4, fmt("gradient rel err %.2e", worst));
  }
  {  // softmax rows and convexity
    CounterRng rng(12);
    const auto plain = ml::init_mlp({4, 64, 16, 4, 2}, false, rng);
    const auto convex = ml::init_mlp({4, 64, 16, 4, 2}, true, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(1000, 4, [&] { return 5 * g(rng); });
    const auto p = plain.probabilities(x);
    expect(((p.rowwise().sum().array() - 1).abs() < 1e-12).all() && (p.array() >= 0).all(), "softmax normalisation");
    std::uniform_real_distribution<double> u(0, 1);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
      const Eigen::MatrixXd ab = Eigen::MatrixXd::NullaryExpr(2, 4, [&] { return g(rng); });
      const double t = u(rng);
      const Eigen::MatrixXd mid = t * ab.row(0) + (1 - t) * ab.row(1);
      const auto lm = convex.logits(mid), la = convex.logits(ab);
      for (int c = 0; c < 2; ++c) bad += lm(0, c) > t * la(0, c) + (1 - t) * la(1, c) + 1e-12;
    }
    expect(bad == 0, fmt("%d convexity violations", bad));
  }
  {  // SMO optimality conditions
    const auto pts = uniform_corr4(1000, 13);
    const auto x = ml::features(pts);
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = pts[i].label ? 1 : -1;
    const auto r = ml::smo(x, y, 10, 1);
    const double v = ml::kkt_violation(x, y, r, 10, 1);
    const bool box = (r.alpha.array() >= 0).all() && (r.alpha.array() <= 10).all();
    expect(v <= 1e-3 && box && std::abs(r.alpha.dot(y)) < 1e-8, fmt("SMO KKT violation %.2e", v));
  }
  {  // SDP weak duality and determinism on NPA problems
    CounterRng rng(14);
    const auto s = npa::build_structure(npa::NpaLevel::pure(2), Space::Full8);
    int bad = 0, nondet = 0;
    for (int k = 0; k < 50; ++k) {
      const auto p = npa::lambda_problem(s, sampling::random_direction(8, rng));
      const auto a = sdp::solve(p), b = sdp::solve(p);
      bad += !a.optimal() || a.dualObjective > a.primalObjective + 1e-7 * (1 + std::abs(a.primalObjective));
      nondet += (a.y - b.y).norm() != 0 || a.iterations != b.iterations;
    }
    expect(bad == 0, fmt("%d weak duality failures", bad));
    expect(nondet == 0, fmt("%d non-deterministic solves", nondet));
  }
  {  // Q2 within Q1+AB within Q1 on points near the boundaries
    CounterRng rng(15);
    const int n = 1000;
    std::vector<Behaviour> pts;
    std::uniform_real_distribution<double> scale(0.97, 1.03);
    while (static_cast<int>(pts.size()) < n) {
      const auto u = sampling::random_direction(8, rng);
      const double l = npa::max_lambda(u, Space::Full8, npa::NpaLevel::one_plus_ab());
      const Behaviour b(Space::Full8, l * scale(rng) * u);
      if (in_ns(b)) pts.push_back(b);
    }
    std::vector<int> bad(n);
    parallel_for(pts.size(), kThreads, [&](std::size_t i) {
      const bool q2 = npa::is_member(pts[i], npa::NpaLevel::pure(2));
      const bool qab = npa::is_member(pts[i], npa::NpaLevel::one_plus_ab());
      const bool q1 = npa::is_member(pts[i], npa::NpaLevel::pure(1));
      bad[i] = (q2 && !qab) || (qab && !q1);
    });
    int b = 0;
    for (int x : bad) b += x;
    expect(b == 0, fmt("%d hierarchy inversions", b));
  }
  {  // hit-and-run moments on the cube
    CounterRng rng(16);
    const int n = 50000;
    const auto xs = sampling::hit_and_run(ns_system(Space::Corr4), Eigen::VectorXd::Zero(4), n, rng);
    Eigen::Vector4d m1 = Eigen::Vector4d::Zero();
    Eigen::Matrix4d m2 = Eigen::Matrix4d::Zero();
    for (const auto& x : xs) {
      m1 += x;
      m2 += x * x.transpose();
    }
    m1 /= n;
    m2 /= n;
    const double off = (m2 - Eigen::Matrix4d(m2.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
    const double diag = (m2.diagonal().array() - 1.0 / 3).abs().maxCoeff();
    expect(m1.cwiseAbs().maxCoeff() < 0.02 && diag < 0.015 && off < 0.02,
           fmt("cube moments mean %.3f var %.3f cov %.3f", m1.cwiseAbs().maxCoeff(), diag, off));
  }
  std::string detail = failed.empty() ? "gradient, softmax, convexity, SMO KKT, SDP duality and determinism, "
                                        "hierarchy nesting, hit-and-run moments"
                                      : "";
  for (const auto& f : failed) detail += (detail.empty() ? "" : "; ") + f;
  return {failed.empty(), detail};
}

// ---- 12
Outcome cost_ordering() {
  const auto oracle = sampling::make_oracle("npa:1ab");
  const int n = 2000;
  auto time_per_point = [&](auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    return since(t0) / n;
  };
  const double uniform = time_per_point([&] { sampling::sample_uniform(Space::Full8, n, oracle, false, 12, 1); });
  const double balanced = time_per_point([&] { sampling::sample_uniform(Space::Full8, n, oracle, true, 12, 1); });
  std::vector<sampling::LabelledPoint> offsetPts;
  const double offset = time_per_point([&] { offsetPts = sampling::sample_offset(Space::Full8, n, {}, 12, false, 1); });

  // See-saw on the inner points of a few boundary pairs, the hard case it exists for.
  const int m = 4;
  seesaw::SeesawConfig cfg;
  cfg.d = 4;
  cfg.seeds = 10;
  const auto t0 = Clock::now();
  for (int i = 0; i < m; ++i) seesaw::steered_seesaw(offsetPts[2 * i].b, cfg, CounterRng(12).fork(i));
  const double seesawCost = since(t0) / m;

  const bool ok = uniform < balanced && balanced < offset && 10 * offset < seesawCost;
  return {ok, fmt("seconds per point: uniform %.2e, balanced %.2e, offset %.2e, see-saw %.2e "
                  "(required uniform < balanced < offset << see-saw)",
                  uniform, balanced, offset, seesawCost)};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> all{
      {1, {"Tsirelson bound", tsirelson_bound}},
      {2, {"oracle equivalence", oracle_equivalence}},
      {3, {"quantum volume", quantum_volume}},
      {4, {"local volume", local_volume}},
      {5, {"direction acceptance", facet_acceptance}},
      {6, {"see-saw soundness", seesaw_soundness}},
      {7, {"boundary vs see-saw gap", appendix_a}},
      {8, {"SVM unbalanced", svm_unbalanced}},
      {9, {"SVM offset", svm_offset}},
      {10, {"MLP unbalanced", mlp_unbalanced}},
      {11, {"property suite", property_suite}},
      {12, {"per-point cost ordering", cost_ordering}},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::stoi(argv[i]));
  if (which.empty()) {
    for (const auto& [k, v] : criteria()) which.push_back(k);
  }
  int failures = 0;
  for (int k : which) {
    const auto it = criteria().find(k);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << it->second.first << "): " << o.detail
              << " [" << fmt("%.1f", since(t0)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

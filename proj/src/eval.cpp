#include "chsh/eval.hpp"

#include "chsh/error.hpp"
#include "chsh/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace chsh::eval {

Classifier model_classifier(const ml::Model& m) {
  return [m](const Behaviour& b) { return ml::predict(m, b).label; };
}

Classifier composite_classifier(const ml::Model& m) {
  return [m](const Behaviour& b) { return ml::composite_full8_predict(m, b); };
}

Classifier oracle_classifier(const sampling::Oracle& o) {
  return [o](const Behaviour& b) { return o.contains(b) ? 1 : 0; };
}

void SliceSpec::validate() const {
  const Eigen::Index dim = origin.dim();
  if (e1.size() != dim || e2.size() != dim) throw DomainError("slice basis does not match the origin's space");
  if (std::abs(e1.norm() - 1) > 1e-12 || std::abs(e2.norm() - 1) > 1e-12) {
    throw DomainError("slice basis vectors must have unit norm");
  }
  if (std::abs(e1.dot(e2)) > 1e-12) throw DomainError("slice basis vectors must be orthogonal");
  if (resolution < 2 || !(umax > umin) || !(vmax > vmin)) throw DomainError("invalid slice grid");
}

SliceSpec slice_pr_pair(int resolution) {
  SliceSpec s;
  s.name = "slice1";
  s.e1 = Eigen::Vector4d(1, 1, 1, -1) / 2;
  s.e2 = Eigen::Vector4d(-1, 1, 1, 1) / 2;
  s.resolution = resolution;
  s.umin = s.vmin = -2;
  s.umax = s.vmax = 2;
  return s;
}

SliceSpec slice_equal_correlators(int resolution) {
  SliceSpec s;
  s.name = "slice2";
  s.e1 = Eigen::Vector4d(1, 1, 1, 0) / std::numbers::sqrt3;
  s.e2 = Eigen::Vector4d(0, 0, 0, 1);
  s.resolution = resolution;
  s.umin = -std::numbers::sqrt3;
  s.umax = std::numbers::sqrt3;
  s.vmin = -1;
  s.vmax = 1;
  return s;
}

SliceSpec slice_full8_marginals(int resolution) {
  SliceSpec s;
  s.name = "full8";
  s.origin = Behaviour::origin(Space::Full8);
  s.e1 = Eigen::VectorXd::Zero(8);
  s.e1.tail<4>() << 1, 1, 1, -1;
  s.e1 /= 2;
  s.e2 = Eigen::VectorXd::Zero(8);
  s.e2.head<4>().setConstant(0.5);
  s.resolution = resolution;
  s.umin = s.vmin = -2;
  s.umax = s.vmax = 2;
  return s;
}

SliceSpec named_slice(const std::string& name, int resolution) {
  if (name == "slice1") return slice_pr_pair(resolution);
  if (name == "slice2") return slice_equal_correlators(resolution);
  if (name == "full8") return slice_full8_marginals(resolution);
  throw DomainError("unknown slice '" + name + "' (expected slice1, slice2 or full8)");
}

std::vector<SlicePoint> slice_grid(const SliceSpec& spec, const Classifier& c, unsigned threads) {
  spec.validate();
  const int r = spec.resolution;
  std::vector<SlicePoint> grid(static_cast<std::size_t>(r) * r);
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    const int iu = static_cast<int>(k % r), iv = static_cast<int>(k / r);
    const double u = spec.umin + (spec.umax - spec.umin) * iu / (r - 1);
    const double v = spec.vmin + (spec.vmax - spec.vmin) * iv / (r - 1);
    const Behaviour b(spec.space(), spec.point(u, v));
    const bool inside = in_ns(b);
    grid[k] = {u, v, inside, inside ? c(b) : -1};
  });
  return grid;
}

double slice_accuracy(const SliceSpec& spec, const Classifier& model, const Classifier& truth, unsigned threads) {
  const auto m = slice_grid(spec, model, threads);
  const auto t = slice_grid(spec, truth, threads);
  std::size_t agree = 0, total = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m[k].inNs) continue;
    ++total;
    agree += m[k].label == t[k].label;
  }
  return total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
}

void write_slice_csv(const std::vector<SlicePoint>& grid, std::ostream& out) {
  out << "u,v,label\n";
  out.precision(17);
  for (const auto& p : grid) {
    if (p.inNs) out << p.u << ',' << p.v << ',' << p.label << '\n';
  }
}

double spread_test(const Classifier& c, Space space, npa::NpaLevel level, double sigma, int n, std::uint64_t seed,
                   unsigned threads) {
  const auto pts = sampling::spread_sample(space, {sigma, 0.01}, level, n, seed, threads);
  if (pts.empty()) return 0.0;
  std::vector<int> hit(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t i) { hit[i] = c(pts[i].b) == pts[i].label; });
  return static_cast<double>(std::accumulate(hit.begin(), hit.end(), 0)) / static_cast<double>(pts.size());
}

VolumeResult volume_ratio(const std::vector<Behaviour>& points, const sampling::Oracle& oracle, unsigned threads) {
  VolumeResult r;
  r.n = static_cast<int>(points.size());
  if (points.empty()) return r;
  std::vector<char> in(points.size());
  std::vector<double> secs(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    in[i] = oracle.contains(points[i]) ? 1 : 0;
    secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  const double n = static_cast<double>(points.size());
  r.ratio = static_cast<double>(std::accumulate(in.begin(), in.end(), 0)) / n;
  r.stderr_ = std::sqrt(r.ratio * (1 - r.ratio) / n);
  r.meanTimePerPoint = std::accumulate(secs.begin(), secs.end(), 0.0) / n;
  return r;
}

std::vector<Behaviour> volume_points(const std::string& region, Space space, int n, std::uint64_t seed) {
  if (region == "simplex") {
    if (space != Space::Full8) throw DomainError("the simplex region lives in full8");
    CounterRng rng(seed);
    return sampling::sample_simplex(n, rng);
  }
  if (region == "uniform") {
    CounterRng rng(seed);
    const auto raw = sampling::hit_and_run(ns_system(space), Eigen::VectorXd::Zero(dimension(space)), n, rng);
    std::vector<Behaviour> out;
    out.reserve(raw.size());
    for (const auto& x : raw) out.emplace_back(space, x);
    return out;
  }
  throw DomainError("unknown region '" + region + "' (expected uniform or simplex)");
}

namespace {

std::string sigma_key(double s) {
  std::ostringstream o;
  o << "spread_" << s;
  return o.str();
}

}  // namespace

EvalReport full_report(const Classifier& model, const SuiteConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport rep;
  auto score = [&](const std::vector<sampling::LabelledPoint>& pts) {
    std::vector<int> preds(pts.size()), ys(pts.size());
    parallel_for(pts.size(), cfg.threads, [&](std::size_t i) {
      preds[i] = model(pts[i].b);
      ys[i] = pts[i].label;
    });
    return ml::compute_metrics(preds, ys);
  };
  if (!cfg.test.empty()) {
    rep.overall = score(cfg.test);
    rep.perSuite["test"] = rep.overall.accuracy;
    rep.perSuite["test_balanced"] = rep.overall.balancedAccuracy;
  }
  if (!cfg.unbalanced.empty()) {
    const auto m = score(cfg.unbalanced);
    rep.perSuite["unbalanced"] = m.accuracy;
    rep.perSuite["unbalanced_balanced"] = m.balancedAccuracy;
  }
  const Space space = !cfg.test.empty() ? cfg.test.front().b.space() : Space::Corr4;
  for (std::size_t k = 0; k < cfg.sigmas.size(); ++k) {
    rep.perSuite[sigma_key(cfg.sigmas[k])] =
        spread_test(model, space, cfg.level, cfg.sigmas[k], cfg.spreadPoints, cfg.seed + k, cfg.threads);
  }
  for (const auto& name : cfg.slices) {
    if (!cfg.truth) throw DomainError("slice suites need a ground-truth classifier");
    rep.perSuite["slice_" + name] =
        slice_accuracy(named_slice(name, cfg.sliceResolution), model, cfg.truth, cfg.threads);
  }
  rep.runtimeSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string report_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.overall.accuracy;
  j["balancedAccuracy"] = r.overall.balancedAccuracy;
  j["precision"] = r.overall.precision;
  j["recall"] = r.overall.recall;
  j["f1"] = r.overall.f1;
  j["perSuite"] = r.perSuite;
  j["runtimeSeconds"] = r.runtimeSeconds;
  return j.dump(2);
}

}  // namespace chsh::eval

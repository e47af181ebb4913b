#include "chsh/sampling.hpp"

#include "chsh/error.hpp"
#include "chsh/parallel.hpp"
#include "chsh/seesaw.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace chsh::sampling {

using json = nlohmann::json;

namespace {

std::uint64_t hash_coords(const Behaviour& b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < b.dim(); ++i) {
    const double v = b[i];
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Oracle make_oracle(const std::string& spec) {
  // Points outside the ns polytope are outside every quantum set.
  if (spec == "tlm") return {spec, [](const Behaviour& b) { return in_ns(b) && tlm_satisfied(b); }};
  if (spec == "local") return {spec, [](const Behaviour& b) { return in_ns(b) && local_membership(b); }};
  if (spec.rfind("npa:", 0) == 0) {
    const npa::NpaLevel level = npa::NpaLevel::parse(spec.substr(4));
    return {"npa:" + level.to_string(), [level](const Behaviour& b) { return npa::is_member(b, level); }};
  }
  if (spec.rfind("seesaw:", 0) == 0) {
    seesaw::SeesawConfig cfg;
    char comma = 0;
    std::istringstream in(spec.substr(7));
    if (!(in >> cfg.d >> comma >> cfg.seeds) || comma != ',' || !in.eof()) {
      throw DomainError("seesaw oracle needs the form seesaw:<d>,<seeds>");
    }
    cfg.validate();
    // Each point gets its own seed stream derived from its coordinates.
    return {spec, [cfg](const Behaviour& b) {
              return in_ns(b) && seesaw::steered_seesaw(b, cfg, CounterRng(hash_coords(b))).status ==
                     seesaw::VerdictStatus::InQdd;
            }};
  }
  throw DomainError("unknown oracle '" + spec + "' (expected tlm, local, npa:<level>, seesaw:<d>,<seeds>)");
}

std::pair<double, double> chord(const HalfspaceSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd slack = sys.slacks(x);
  const Eigen::VectorXd rate = sys.normals * u;
  for (Eigen::Index i = 0; i < rate.size(); ++i) {
    if (rate[i] > 0) {
      hi = std::min(hi, slack[i] / rate[i]);
    } else if (rate[i] < 0) {
      lo = std::max(lo, slack[i] / rate[i]);
    }
  }
  return {lo, hi};
}

Eigen::VectorXd random_direction(int dim, CounterRng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(dim);
  do {
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
  } while (u.norm() == 0.0);
  return u.normalized();
}

std::vector<Eigen::VectorXd> hit_and_run(const HalfspaceSystem& sys, const Eigen::VectorXd& start, int n,
                                         CounterRng& rng, const HitAndRunConfig& cfg) {
  if (n < 0 || cfg.thinning < 1 || cfg.burnIn < 0) throw DomainError("invalid hit-and-run parameters");
  if (sys.slacks(start).minCoeff() <= 0) throw DomainError("hit-and-run start point is not strictly interior");
  const int dim = static_cast<int>(start.size());
  Eigen::VectorXd x = start;
  auto step = [&] {
    const Eigen::VectorXd u = random_direction(dim, rng);
    const auto [lo, hi] = chord(sys, x, u);
    x += (lo + (hi - lo) * rng.uniform()) * u;
  };
  for (int i = 0; i < cfg.burnIn; ++i) step();
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < cfg.thinning; ++i) step();
    out.push_back(x);
  }
  return out;
}

std::vector<LabelledPoint> sample_uniform(Space space, int n, const Oracle& oracle, bool balanced,
                                          std::uint64_t seed, unsigned threads, const HitAndRunConfig& cfg) {
  if (n < 0) throw DomainError("sample size must be non-negative");
  CounterRng rng(seed);
  const HalfspaceSystem sys = ns_system(space);
  const PointMeta meta{balanced ? "balanced" : "uniform", std::nullopt, std::nullopt, oracle.name, seed};
  std::vector<LabelledPoint> out;
  if (n == 0) return out;

  const int want0 = n / 2;
  const int want1 = n - want0;
  int have0 = 0, have1 = 0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension(space));
  HitAndRunConfig chainCfg = cfg;
  // Labelling is the expensive part; draw a batch from the chain, label it in
  // parallel, then accept in chain order.
  while (static_cast<int>(out.size()) < n) {
    const int remaining = n - static_cast<int>(out.size());
    const int batch = balanced ? std::max(256, remaining) : remaining;
    std::vector<Eigen::VectorXd> pts = hit_and_run(sys, x, batch, rng, chainCfg);
    x = pts.back();
    chainCfg.burnIn = 0;
    std::vector<char> labels(pts.size());
    parallel_for(pts.size(), threads,
                 [&](std::size_t i) { labels[i] = oracle.contains(Behaviour(space, pts[i])) ? 1 : 0; });
    for (std::size_t i = 0; i < pts.size() && static_cast<int>(out.size()) < n; ++i) {
      const int label = labels[i];
      if (balanced) {
        if (label == kQuantum ? have1 >= want1 : have0 >= want0) continue;
      }
      (label == kQuantum ? have1 : have0)++;
      out.push_back({Behaviour(space, pts[i]), label, meta});
    }
  }
  return out;
}

Behaviour simplex_point(const std::array<double, 9>& weights) {
  const auto verts = saturating_vertices();
  Eigen::VectorXd c = weights[8] * Behaviour::pr_box().coords();
  for (int i = 0; i < 8; ++i) c += weights[i] * verts[i].coords();
  return Behaviour(Space::Full8, c);
}

std::vector<Behaviour> sample_simplex(int n, CounterRng& rng) {
  if (n < 0) throw DomainError("sample size must be non-negative");
  std::exponential_distribution<double> expo(1.0);
  std::vector<Behaviour> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    std::array<double, 9> w;
    double total = 0;
    for (double& v : w) total += (v = expo(rng));
    for (double& v : w) v /= total;
    out.push_back(simplex_point(w));
  }
  return out;
}

bool exits_through_canonical_facet(const Eigen::VectorXd& u) {
  const Space space = u.size() == 8 ? Space::Full8 : Space::Corr4;
  if (u.size() != dimension(space)) throw DomainError("direction must have 4 or 8 coordinates");
  const Eigen::VectorXd canonical = chsh_functional(space, ChshVariant::canonical());
  const double rate = canonical.dot(u);
  if (rate <= 0) return false;
  const double hit = 2.0 / rate;
  for (const auto& v : ChshVariant::all()) {
    if (v == ChshVariant::canonical()) continue;
    const double r = chsh_functional(space, v).dot(u);
    if (r > 0 && 2.0 / r <= hit) return false;
  }
  const HalfspaceSystem ns = ns_system(space);
  const Eigen::VectorXd rates = ns.normals * u;
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    if (rates[i] > 0 && ns.offsets[i] / rates[i] <= hit) return false;
  }
  return true;
}

std::vector<Eigen::VectorXd> filter_to_facet(const std::vector<Eigen::VectorXd>& dirs) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& u : dirs) {
    if (exits_through_canonical_facet(u)) out.push_back(u);
  }
  return out;
}

void OffsetConfig::validate() const {
  if (!(epsilon >= 1e-10)) throw DomainError("offset epsilon must be at least 1e-10");
}

std::pair<LabelledPoint, LabelledPoint> boundary_pair(const Eigen::VectorXd& u, Space space, const OffsetConfig& cfg,
                                                      std::uint64_t seed) {
  cfg.validate();
  const double lambda = npa::max_lambda(u, space, cfg.level);
  const Eigen::VectorXd pb = lambda * u;
  const PointMeta meta{"offset", cfg.epsilon, std::nullopt, cfg.level.to_string(), seed};
  return {LabelledPoint{Behaviour(space, (1 - cfg.epsilon) * pb), kQuantum, meta},
          LabelledPoint{Behaviour(space, (1 + cfg.epsilon) * pb), kNotQuantum, meta}};
}

std::vector<LabelledPoint> sample_offset(Space space, int n, const OffsetConfig& cfg, std::uint64_t seed,
                                         bool facetOnly, unsigned threads) {
  cfg.validate();
  if (n < 0) throw DomainError("sample size must be non-negative");
  if (facetOnly && space != Space::Full8) throw DomainError("facet-filtered directions need the full8 space");
  CounterRng rng(seed);
  const int pairs = n / 2;
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(pairs);
  while (static_cast<int>(dirs.size()) < pairs) {
    Eigen::VectorXd u = random_direction(dimension(space), rng);
    if (!facetOnly || exits_through_canonical_facet(u)) dirs.push_back(std::move(u));
  }
  std::vector<LabelledPoint> out(2 * pairs);
  parallel_for(dirs.size(), threads, [&](std::size_t i) {
    auto [inside, outside] = boundary_pair(dirs[i], space, cfg, seed);
    out[2 * i] = std::move(inside);
    out[2 * i + 1] = std::move(outside);
  });
  return out;
}

void SpreadConfig::validate() const {
  if (!(sigma > 0)) throw DomainError("spread sigma must be positive");
  if (!(shellThickness > 0 && shellThickness < 1)) throw DomainError("shell thickness must lie in (0, 1)");
}

double boundary_scale(const Eigen::VectorXd& u, Space space, npa::NpaLevel level) {
  if (space == Space::Full8) return npa::max_lambda(u, space, level);
  // Correlator space: every level equals Q, whose boundary is the TLM surface.
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] != 0) hi = std::min(hi, 1.0 / std::abs(u[i]));
  }
  auto inside = [&](double t) { return tlm_margin(Behaviour(Space::Corr4, t * u)) <= 0; };
  if (inside(hi)) return hi;
  double lo = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<LabelledPoint> spread_sample(Space space, const SpreadConfig& cfg, npa::NpaLevel level, int n,
                                         std::uint64_t seed, unsigned threads, const HitAndRunConfig& hr) {
  cfg.validate();
  if (n < 0) throw DomainError("sample size must be non-negative");
  CounterRng chainRng(seed);
  CounterRng shiftRng = CounterRng(seed).fork(1);
  std::normal_distribution<double> normal(0.0, cfg.sigma);
  const HalfspaceSystem sys = ns_system(space);
  const PointMeta meta{"spread", std::nullopt, cfg.sigma, space == Space::Corr4 ? "tlm" : level.to_string(), seed};

  std::vector<LabelledPoint> out;
  out.reserve(n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension(space));
  HitAndRunConfig chainCfg = hr;
  while (static_cast<int>(out.size()) < n) {
    std::vector<Eigen::VectorXd> pts = hit_and_run(sys, x, 1024, chainRng, chainCfg);
    x = pts.back();
    chainCfg.burnIn = 0;
    std::vector<double> scale(pts.size(), 0.0);
    parallel_for(pts.size(), threads, [&](std::size_t i) {
      const double r = pts[i].norm();
      if (r > 0) scale[i] = boundary_scale(pts[i] / r, space, level);
    });
    for (std::size_t i = 0; i < pts.size() && static_cast<int>(out.size()) < n; ++i) {
      const double r = pts[i].norm();
      if (scale[i] <= 0 || std::abs(r / scale[i] - 1) > cfg.shellThickness) continue;
      const double draw = normal(shiftRng);
      const Eigen::VectorXd pb = (scale[i] / r) * pts[i];
      out.push_back({Behaviour(space, (1 + draw) * pb), draw < 0 ? kQuantum : kNotQuantum, meta});
    }
  }
  return out;
}

// ---- I/O

namespace {

json to_json(const LabelledPoint& p) {
  json j;
  j["space"] = std::string(to_string(p.b.space()));
  j["x"] = std::vector<double>(p.b.coords().data(), p.b.coords().data() + p.b.dim());
  if (p.label >= 0) {
    j["label"] = p.label;
  } else {
    j["label"] = nullptr;
  }
  j["method"] = p.meta.method;
  j["epsilon"] = p.meta.epsilon ? json(*p.meta.epsilon) : json(nullptr);
  j["sigma"] = p.meta.sigma ? json(*p.meta.sigma) : json(nullptr);
  j["level"] = p.meta.level;
  j["seed"] = p.meta.seed;
  return j;
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

void write_jsonl(const std::vector<LabelledPoint>& points, std::ostream& out) {
  for (const auto& p : points) out << to_json(p).dump(-1, ' ', false, json::error_handler_t::strict) << '\n';
  if (!out) throw IoError("failed writing dataset");
}

void write_jsonl(const std::vector<LabelledPoint>& points, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_jsonl(points, f);
}

std::vector<LabelledPoint> read_jsonl(std::istream& in, bool requireLabel) {
  std::vector<LabelledPoint> out;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) -> IoError {
      return IoError("line " + std::to_string(lineNo) + ": " + why);
    };
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw fail("expected a JSON object");
      for (const char* key : {"space", "x", "seed"}) {
        if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
      }
      const Space space = parse_space(j["space"].get<std::string>());
      const auto x = j["x"].get<std::vector<double>>();
      if (static_cast<int>(x.size()) != dimension(space)) throw fail("coordinate count does not match space");
      LabelledPoint p;
      p.b = Behaviour(space, Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
      if (j.contains("label") && !j["label"].is_null()) {
        p.label = j["label"].get<int>();
        if (p.label != 0 && p.label != 1) throw fail("label must be 0 or 1");
      } else if (requireLabel) {
        throw fail("missing label");
      } else {
        p.label = -1;
      }
      p.meta.method = j.value("method", std::string());
      p.meta.epsilon = optional_number(j, "epsilon");
      p.meta.sigma = optional_number(j, "sigma");
      p.meta.level = j.contains("level") && j["level"].is_string() ? j["level"].get<std::string>() : "";
      p.meta.seed = j["seed"].get<std::uint64_t>();
      out.push_back(std::move(p));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return out;
}

std::vector<LabelledPoint> read_jsonl(const std::string& path, bool requireLabel) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  return read_jsonl(f, requireLabel);
}

void write_csv(const std::vector<LabelledPoint>& points, std::ostream& out) {
  out << "space";
  const int dim = points.empty() ? 0 : static_cast<int>(points.front().b.dim());
  for (int i = 0; i < dim; ++i) out << ",x" << i;
  out << ",label,method,epsilon,sigma,level,seed\n";
  out.precision(17);
  for (const auto& p : points) {
    out << to_string(p.b.space());
    for (Eigen::Index i = 0; i < p.b.dim(); ++i) out << ',' << p.b[i];
    out << ',' << p.label << ',' << p.meta.method << ',';
    if (p.meta.epsilon) out << *p.meta.epsilon;
    out << ',';
    if (p.meta.sigma) out << *p.meta.sigma;
    out << ',' << p.meta.level << ',' << p.meta.seed << '\n';
  }
}

}  // namespace chsh::sampling

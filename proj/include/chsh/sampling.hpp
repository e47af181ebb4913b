#pragma once

// Dataset generation: hit-and-run over the no-signalling polytope, the
// nonlocal simplex, boundary-offset pairs and the spread sampler, plus the
// JSONL/CSV dataset formats.

#include "chsh/geometry.hpp"
#include "chsh/npa.hpp"
#include "chsh/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chsh::sampling {

inline constexpr int kNotQuantum = 0;
inline constexpr int kQuantum = 1;

struct PointMeta {
  std::string method;  // uniform, balanced, offset, spread, simplex
  std::optional<double> epsilon;
  std::optional<double> sigma;
  std::string level;  // oracle or NPA level that produced the label
  std::uint64_t seed = 0;
};

struct LabelledPoint {
  Behaviour b = Behaviour::origin(Space::Corr4);
  int label = kNotQuantum;
  PointMeta meta;
};

/// Membership oracle with the name recorded in dataset metadata.
struct Oracle {
  std::string name;
  std::function<bool(const Behaviour&)> contains;
};

/// "tlm", "local", "npa:<level>" or "seesaw:<d>,<seeds>".
Oracle make_oracle(const std::string& spec);

struct HitAndRunConfig {
  int thinning = 50;
  int burnIn = 1000;
};

/// Feasible step range [lo, hi] of x + t u inside sys.
std::pair<double, double> chord(const HalfspaceSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

/// n points, each `thinning` chord steps after the previous (the first after
/// burnIn + thinning). Throws DomainError unless start is strictly interior.
std::vector<Eigen::VectorXd> hit_and_run(const HalfspaceSystem& sys, const Eigen::VectorXd& start, int n,
                                         CounterRng& rng, const HitAndRunConfig& cfg = {});

/// Isotropic unit vector.
Eigen::VectorXd random_direction(int dim, CounterRng& rng);

/// Uniform points of the ns polytope labelled by the oracle. Balanced mode
/// keeps drawing until there are n/2 points labelled 0 and n - n/2 labelled 1.
std::vector<LabelledPoint> sample_uniform(Space space, int n, const Oracle& oracle, bool balanced,
                                          std::uint64_t seed, unsigned threads = 1,
                                          const HitAndRunConfig& cfg = {});

/// Convex combination of the 8 canonical saturating vertices and the
/// canonical PR box (weights[8] is the PR weight).
Behaviour simplex_point(const std::array<double, 9>& weights);

/// Uniform points of that 8-simplex.
std::vector<Behaviour> sample_simplex(int n, CounterRng& rng);

/// True when the ray t u (t > 0) leaves the local polytope through the
/// canonical CHSH facet before any other CHSH or positivity facet.
bool exits_through_canonical_facet(const Eigen::VectorXd& u);
std::vector<Eigen::VectorXd> filter_to_facet(const std::vector<Eigen::VectorXd>& dirs);

struct OffsetConfig {
  double epsilon = 1e-3;
  npa::NpaLevel level = npa::NpaLevel::one_plus_ab();

  void validate() const;  // epsilon >= 1e-10
};

/// ((1 - eps) p_b, quantum) and ((1 + eps) p_b, not quantum) with p_b the
/// boundary point of the level along u.
std::pair<LabelledPoint, LabelledPoint> boundary_pair(const Eigen::VectorXd& u, Space space, const OffsetConfig& cfg,
                                                      std::uint64_t seed = 0);

/// n/2 boundary pairs along isotropic directions (facet-filtered ones when
/// facetOnly, Full8 only).
std::vector<LabelledPoint> sample_offset(Space space, int n, const OffsetConfig& cfg, std::uint64_t seed,
                                         bool facetOnly = false, unsigned threads = 1);

struct SpreadConfig {
  double sigma = 1e-2;
  double shellThickness = 0.01;

  void validate() const;
};

/// Largest t with t u in Q along unit u. Corr4 uses the closed-form boundary
/// (all levels coincide there); Full8 asks the NPA level.
double boundary_scale(const Eigen::VectorXd& u, Space space, npa::NpaLevel level);

/// Boundary points harvested from a thin shell of uniform ns samples, each
/// scaled by 1 + N(0, sigma); label 1 when the draw is negative.
std::vector<LabelledPoint> spread_sample(Space space, const SpreadConfig& cfg, npa::NpaLevel level, int n,
                                         std::uint64_t seed, unsigned threads = 1,
                                         const HitAndRunConfig& hr = {});

/// One JSON object per line: space, x, label, method, epsilon, sigma, level, seed.
void write_jsonl(const std::vector<LabelledPoint>& points, std::ostream& out);
void write_jsonl(const std::vector<LabelledPoint>& points, const std::string& path);

/// Throws IoError naming the line on malformed input. Without requireLabel a
/// missing label reads as -1.
std::vector<LabelledPoint> read_jsonl(std::istream& in, bool requireLabel = true);
std::vector<LabelledPoint> read_jsonl(const std::string& path, bool requireLabel = true);

void write_csv(const std::vector<LabelledPoint>& points, std::ostream& out);

}  // namespace chsh::sampling

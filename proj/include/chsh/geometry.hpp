#pragma once

// Exact descriptions of the CHSH non-signalling polytope, the local polytope
// and the analytic quantum boundary in correlation space.

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace chsh {

enum class Space { Corr4, Full8 };

inline int dimension(Space s) { return s == Space::Corr4 ? 4 : 8; }
std::string_view to_string(Space s);
Space parse_space(std::string_view name);

/// A point in correlation space (4 correlators) or the full CHSH space.
///
/// Full8 coordinate order: <A0>, <A1>, <B0>, <B1>, <A0B0>, <A0B1>, <A1B0>,
/// <A1B1>. Corr4 keeps only the last four (marginals implicitly zero).
class Behaviour {
 public:
  Behaviour() : space_(Space::Corr4), coords_(Eigen::VectorXd::Zero(4)) {}
  Behaviour(Space space, Eigen::VectorXd coords);

  static Behaviour origin(Space space);
  static Behaviour corr4(double e00, double e01, double e10, double e11);
  static Behaviour full8(const std::array<double, 8>& c);
  static Behaviour pr_box();                 // [0,0,0,0,1,1,1,-1]
  static Behaviour tsirelson(Space space);   // correlators (1,1,1,-1)/sqrt(2)

  Space space() const { return space_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::VectorXd& coords() { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  double marginal_a(int x) const { return space_ == Space::Full8 ? coords_[x] : 0.0; }
  double marginal_b(int y) const { return space_ == Space::Full8 ? coords_[2 + y] : 0.0; }
  double correlator(int x, int y) const { return coords_[offset() + 2 * x + y]; }
  Eigen::Vector4d correlators() const { return coords_.tail<4>(); }

  /// Full8 view; Corr4 behaviours get zero marginals.
  Behaviour to_full8() const;
  /// Drops the marginals.
  Behaviour to_corr4() const;

  /// p(a,b|x,y) with outcomes a,b in {0,1} standing for +1,-1.
  double probability(int a, int b, int x, int y) const;

  Behaviour scaled(double f) const { return Behaviour(space_, coords_ * f); }

 private:
  int offset() const { return space_ == Space::Full8 ? 4 : 0; }

  Space space_;
  Eigen::VectorXd coords_;
};

/// Rows are outward normals, convention normals * x <= offsets.
struct HalfspaceSystem {
  Eigen::MatrixXd normals;
  Eigen::VectorXd offsets;

  Eigen::Index rows() const { return normals.rows(); }
  Eigen::VectorXd slacks(const Eigen::VectorXd& x) const { return offsets - normals * x; }
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    return slacks(x).minCoeff() >= -tol;
  }
};

/// One of the 8 CHSH functionals: `overallSign * sum_j s_j E_j` with s_j = -1
/// only at `minusPosition` (index 2x+y of the correlator).
struct ChshVariant {
  int minusPosition = 3;
  int overallSign = 1;

  static ChshVariant canonical() { return {}; }
  static std::array<ChshVariant, 8> all();
  int index() const { return 2 * minusPosition + (overallSign > 0 ? 0 : 1); }
  bool operator==(const ChshVariant&) const = default;
};

inline constexpr double kTlmTolerance = 1e-9;
inline constexpr double kArcsinClamp = 1e-12;
inline constexpr double kLocalTolerance = 1e-9;

/// max over the 4 sign patterns of |sum +- arcsin<AxBy>| - pi. Negative inside
/// the quantum set, zero on its boundary. Uses the correlators of either space.
double tlm_margin(const Behaviour& b);
bool tlm_satisfied(const Behaviour& b);

HalfspaceSystem ns_system(Space space);
bool in_ns(const Behaviour& b, double tol = 1e-9);

/// Coefficient vector c with chsh_value(b, v) == c . b.coords().
Eigen::VectorXd chsh_functional(Space space, ChshVariant v);
double chsh_value(const Behaviour& b, ChshVariant v);

/// Fine's criterion: positivity plus all 8 CHSH inequalities. Throws
/// NotNonSignalling when b violates a positivity facet.
bool local_membership(const Behaviour& b);

/// Relabelling of settings/outcomes that carries the canonical CHSH variant to
/// v: chsh_value(relabel(b, v), v) == chsh_value(b, canonical). Involutive.
Behaviour relabel(const Behaviour& b, ChshVariant v);

/// Variant with the largest CHSH value on b.
ChshVariant dominant_variant(const Behaviour& b);

/// The 16 deterministic local behaviours (Full8).
std::vector<Behaviour> deterministic_vertices();
/// The 8 deterministic vertices saturating the canonical CHSH inequality.
std::vector<Behaviour> saturating_vertices();
/// PR box attaining 4 on variant v.
Behaviour pr_box(ChshVariant v);

}  // namespace chsh

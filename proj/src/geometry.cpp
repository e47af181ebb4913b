#include "chsh/geometry.hpp"

#include "chsh/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chsh {

std::string_view to_string(Space s) { return s == Space::Corr4 ? "corr4" : "full8"; }

Space parse_space(std::string_view name) {
  if (name == "corr4") return Space::Corr4;
  if (name == "full8") return Space::Full8;
  throw DomainError("unknown space '" + std::string(name) + "' (expected corr4 or full8)");
}

Behaviour::Behaviour(Space space, Eigen::VectorXd coords) : space_(space), coords_(std::move(coords)) {
  if (coords_.size() != dimension(space_)) {
    throw DomainError("behaviour in " + std::string(to_string(space_)) + " needs " +
                      std::to_string(dimension(space_)) + " coordinates, got " +
                      std::to_string(coords_.size()));
  }
}

Behaviour Behaviour::origin(Space space) {
  return Behaviour(space, Eigen::VectorXd::Zero(dimension(space)));
}

Behaviour Behaviour::corr4(double e00, double e01, double e10, double e11) {
  Eigen::VectorXd c(4);
  c << e00, e01, e10, e11;
  return Behaviour(Space::Corr4, std::move(c));
}

Behaviour Behaviour::full8(const std::array<double, 8>& c) {
  return Behaviour(Space::Full8, Eigen::Map<const Eigen::VectorXd>(c.data(), 8));
}

Behaviour Behaviour::pr_box() { return full8({0, 0, 0, 0, 1, 1, 1, -1}); }

Behaviour Behaviour::tsirelson(Space space) {
  const double h = std::numbers::sqrt2 / 2;
  Behaviour t = corr4(h, h, h, -h);
  return space == Space::Corr4 ? t : t.to_full8();
}

Behaviour Behaviour::to_full8() const {
  if (space_ == Space::Full8) return *this;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(8);
  c.tail<4>() = coords_;
  return Behaviour(Space::Full8, std::move(c));
}

Behaviour Behaviour::to_corr4() const {
  if (space_ == Space::Corr4) return *this;
  return Behaviour(Space::Corr4, coords_.tail<4>());
}

double Behaviour::probability(int a, int b, int x, int y) const {
  const double sa = a == 0 ? 1.0 : -1.0;
  const double sb = b == 0 ? 1.0 : -1.0;
  return 0.25 * (1.0 + sa * marginal_a(x) + sb * marginal_b(y) + sa * sb * correlator(x, y));
}

std::array<ChshVariant, 8> ChshVariant::all() {
  std::array<ChshVariant, 8> out;
  for (int k = 0; k < 4; ++k) {
    out[2 * k] = {k, 1};
    out[2 * k + 1] = {k, -1};
  }
  return out;
}

namespace {

double clamped_arcsin(double v) {
  if (std::abs(v) > 1.0 + kArcsinClamp) {
    throw DomainError("correlator " + std::to_string(v) + " outside [-1, 1]");
  }
  return std::asin(std::clamp(v, -1.0, 1.0));
}

}  // namespace

double tlm_margin(const Behaviour& b) {
  std::array<double, 4> s;
  for (int k = 0; k < 4; ++k) s[k] = clamped_arcsin(b.correlator(k / 2, k % 2));
  const double total = s[0] + s[1] + s[2] + s[3];
  double best = -std::numbers::pi;
  for (int k = 0; k < 4; ++k) best = std::max(best, std::abs(total - 2 * s[k]) - std::numbers::pi);
  return best;
}

bool tlm_satisfied(const Behaviour& b) { return tlm_margin(b) <= kTlmTolerance; }

HalfspaceSystem ns_system(Space space) {
  HalfspaceSystem sys;
  if (space == Space::Corr4) {
    sys.normals.resize(8, 4);
    sys.normals << Eigen::Matrix4d::Identity(), -Eigen::Matrix4d::Identity();
    sys.offsets = Eigen::VectorXd::Ones(8);
    return sys;
  }
  // (-1)^(a+b+1) <AxBy> + (-1)^a <Ax> + (-1)^b <By> <= 1 for a, b, x, y in {0, 1}.
  sys.normals = Eigen::MatrixXd::Zero(16, 8);
  sys.offsets = Eigen::VectorXd::Ones(16);
  int row = 0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          sys.normals(row, 4 + 2 * x + y) = ((a + b + 1) % 2 == 0) ? 1.0 : -1.0;
          sys.normals(row, x) = a == 0 ? 1.0 : -1.0;
          sys.normals(row, 2 + y) = b == 0 ? 1.0 : -1.0;
          ++row;
        }
      }
    }
  }
  return sys;
}

bool in_ns(const Behaviour& b, double tol) { return ns_system(b.space()).contains(b.coords(), tol); }

Eigen::VectorXd chsh_functional(Space space, ChshVariant v) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dimension(space));
  const int off = space == Space::Full8 ? 4 : 0;
  for (int k = 0; k < 4; ++k) c[off + k] = v.overallSign * (k == v.minusPosition ? -1.0 : 1.0);
  return c;
}

double chsh_value(const Behaviour& b, ChshVariant v) {
  double total = 0;
  for (int k = 0; k < 4; ++k) total += (k == v.minusPosition ? -1.0 : 1.0) * b.correlator(k / 2, k % 2);
  return v.overallSign * total;
}

bool local_membership(const Behaviour& b) {
  if (!in_ns(b, kLocalTolerance)) throw NotNonSignalling("behaviour violates a positivity facet");
  for (const auto& v : ChshVariant::all()) {
    if (chsh_value(b, v) > 2.0 + kLocalTolerance) return false;
  }
  return true;
}

Behaviour relabel(const Behaviour& b, ChshVariant v) {
  const int tx = v.minusPosition / 2;
  const int ty = v.minusPosition % 2;
  // Swapping a party's settings moves the minus sign from (1,1) to (tx,ty).
  const bool swapA = tx == 0;
  const bool swapB = ty == 0;
  const double flip = v.overallSign;  // outcome flip on both of Alice's settings

  Behaviour src = b.to_full8();
  std::array<double, 8> out{};
  for (int x = 0; x < 2; ++x) {
    const int sx = swapA ? 1 - x : x;
    out[x] = flip * src.marginal_a(sx);
  }
  for (int y = 0; y < 2; ++y) {
    const int sy = swapB ? 1 - y : y;
    out[2 + y] = src.marginal_b(sy);
  }
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      out[4 + 2 * x + y] = flip * src.correlator(swapA ? 1 - x : x, swapB ? 1 - y : y);
    }
  }
  Behaviour mapped = Behaviour::full8(out);
  return b.space() == Space::Corr4 ? mapped.to_corr4() : mapped;
}

ChshVariant dominant_variant(const Behaviour& b) {
  ChshVariant best = ChshVariant::canonical();
  double bestValue = chsh_value(b, best);
  for (const auto& v : ChshVariant::all()) {
    const double value = chsh_value(b, v);
    if (value > bestValue) {
      bestValue = value;
      best = v;
    }
  }
  return best;
}

std::vector<Behaviour> deterministic_vertices() {
  std::vector<Behaviour> out;
  out.reserve(16);
  for (int mask = 0; mask < 16; ++mask) {
    const double a0 = (mask & 1) ? -1 : 1;
    const double a1 = (mask & 2) ? -1 : 1;
    const double b0 = (mask & 4) ? -1 : 1;
    const double b1 = (mask & 8) ? -1 : 1;
    out.push_back(Behaviour::full8({a0, a1, b0, b1, a0 * b0, a0 * b1, a1 * b0, a1 * b1}));
  }
  return out;
}

std::vector<Behaviour> saturating_vertices() {
  std::vector<Behaviour> out;
  for (auto& v : deterministic_vertices()) {
    if (std::abs(chsh_value(v, ChshVariant::canonical()) - 2.0) < 1e-12) out.push_back(v);
  }
  return out;
}

Behaviour pr_box(ChshVariant v) { return relabel(Behaviour::pr_box(), v); }

}  // namespace chsh

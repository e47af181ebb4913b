#include "chsh/seesaw.hpp"

#include "chsh/error.hpp"
#include "chsh/parallel.hpp"
#include "chsh/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace chsh::seesaw {

using cd = std::complex<double>;

namespace {

constexpr double kRealizationTol = 1e-9;

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Spectrum clipped to [lo, hi].
CMatrix clip_spectrum(const CMatrix& m, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(lo).cwiseMin(hi);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix to_density(const CMatrix& m) {
  CMatrix p = clip_spectrum(m, 0.0, std::numeric_limits<double>::infinity());
  const double tr = p.trace().real();
  if (!(tr > 0)) throw SolverError("see-saw state step produced a zero matrix");
  return p / tr;
}

// Indices of the behaviour coordinates the distance is measured on, in Full8 numbering.
std::vector<int> target_coords(const Behaviour& target) {
  if (target.space() == Space::Corr4) return {4, 5, 6, 7};
  return {0, 1, 2, 3, 4, 5, 6, 7};
}

Eigen::VectorXd target_values(const Behaviour& target) {
  const Behaviour f = target.to_full8();
  const auto idx = target_coords(target);
  Eigen::VectorXd p(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) p[k] = f[idx[k]];
  return p;
}

// Operator on C^d (x) C^d whose expectation is Full8 coordinate k.
CMatrix coordinate_operator(int k, const std::array<CMatrix, 2>& a, const std::array<CMatrix, 2>& b) {
  const int d = static_cast<int>(a[0].rows());
  const CMatrix id = CMatrix::Identity(d, d);
  if (k < 2) return kron(a[k], id);
  if (k < 4) return kron(id, b[k - 2]);
  const int x = (k - 4) / 2, y = (k - 4) % 2;
  return kron(a[x], b[y]);
}

// Hermitian basis of d x d matrices: E_ii, then E_ij + E_ji and i(E_ij - E_ji) for i < j.
struct HermitianBasis {
  struct Element {
    int i, j;
    int kind;  // 0 diagonal, 1 real symmetric, 2 imaginary antisymmetric
  };
  std::vector<Element> elems;

  explicit HermitianBasis(int d) {
    for (int i = 0; i < d; ++i) elems.push_back({i, i, 0});
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        elems.push_back({i, j, 1});
        elems.push_back({i, j, 2});
      }
    }
  }

  int size() const { return static_cast<int>(elems.size()); }

  CMatrix matrix(int k, int d) const {
    CMatrix m = CMatrix::Zero(d, d);
    const auto& e = elems[k];
    switch (e.kind) {
      case 0: m(e.i, e.i) = 1; break;
      case 1: m(e.i, e.j) = 1; m(e.j, e.i) = 1; break;
      default: m(e.i, e.j) = cd(0, 1); m(e.j, e.i) = cd(0, -1); break;
    }
    return m;
  }

  // tr(M B_k) for Hermitian M.
  double trace_with(const CMatrix& m, int k) const {
    const auto& e = elems[k];
    switch (e.kind) {
      case 0: return m(e.i, e.i).real();
      case 1: return 2 * m(e.i, e.j).real();
      default: return 2 * m(e.i, e.j).imag();
    }
  }
};

// sigma with tr(sigma A) = tr(rho (A (x) B)).
CMatrix reduce_to_alice(const CMatrix& rho, const CMatrix& b, int d) {
  CMatrix s = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cd acc = 0;
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) acc += rho(i * d + k, j * d + l) * b(l, k);
      }
      s(i, j) = acc;
    }
  }
  return s;
}

// tau with tr(tau B) = tr(rho (A (x) B)).
CMatrix reduce_to_bob(const CMatrix& rho, const CMatrix& a, int d) {
  CMatrix s = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      cd acc = 0;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) acc += rho(i * d + k, j * d + l) * a(j, i);
      }
      s(k, l) = acc;
    }
  }
  return s;
}

void check_observable(const CMatrix& o, int d, const char* name) {
  if (o.rows() != d || o.cols() != d) throw DomainError(std::string(name) + " has the wrong shape");
  if ((o - o.adjoint()).cwiseAbs().maxCoeff() > kRealizationTol) {
    throw DomainError(std::string(name) + " is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(o), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().cwiseAbs().maxCoeff() > 1 + kRealizationTol) {
    throw DomainError(std::string(name) + " has operator norm above 1");
  }
}

}  // namespace

void Realization::validate() const {
  if (d < 1) throw DomainError("realisation dimension must be positive");
  const int D = d * d;
  if (rho.rows() != D || rho.cols() != D) throw DomainError("state has the wrong shape");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kRealizationTol) throw DomainError("state is not Hermitian");
  if (std::abs(rho.trace().real() - 1) > kRealizationTol) throw DomainError("state trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(rho), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kRealizationTol) throw DomainError("state is not positive semidefinite");
  for (int x = 0; x < 2; ++x) check_observable(alice[x], d, "Alice observable");
  for (int y = 0; y < 2; ++y) check_observable(bob[y], d, "Bob observable");
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Realization tsirelson_realization() {
  Realization r;
  r.d = 2;
  CMatrix z(2, 2), x(2, 2);
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi[0] = phi[3] = 1 / std::numbers::sqrt2;
  r.rho = phi * phi.adjoint();
  r.alice = {z, x};
  r.bob = {(z + x) / std::numbers::sqrt2, (z - x) / std::numbers::sqrt2};
  return r;
}

Realization embed(const Realization& r, int newD) {
  if (newD < r.d) throw DomainError("cannot embed into a smaller dimension");
  const int d = r.d;
  Realization out;
  out.d = newD;
  auto lift = [&](const CMatrix& o) {
    CMatrix m = CMatrix::Identity(newD, newD);
    m.topLeftCorner(d, d) = o;
    return m;
  };
  for (int k = 0; k < 2; ++k) {
    out.alice[k] = lift(r.alice[k]);
    out.bob[k] = lift(r.bob[k]);
  }
  out.rho = CMatrix::Zero(newD * newD, newD * newD);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      for (int j = 0; j < d; ++j) {
        for (int l = 0; l < d; ++l) out.rho(i * newD + k, j * newD + l) = r.rho(i * d + k, j * d + l);
      }
    }
  }
  return out;
}

Behaviour behaviour_of(const Realization& r) {
  std::array<double, 8> c{};
  for (int k = 0; k < 8; ++k) {
    c[k] = r.rho.cwiseProduct(coordinate_operator(k, r.alice, r.bob).transpose()).sum().real();
  }
  return Behaviour::full8(c);
}

CMatrix random_observable(int d, CounterRng& rng) {
  if (d < 2) throw DomainError("observables need dimension at least 2");
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2);
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double re = normal(rng);
      g(i, j) = cd(re, normal(rng));
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const double mag = std::abs(rr(j, j));
    if (mag > 0) q.col(j) *= rr(j, j) / mag;
  }
  Eigen::VectorXd signs(d);
  for (;;) {
    int plus = 0;
    for (int i = 0; i < d; ++i) {
      signs[i] = (rng() >> 63) ? 1.0 : -1.0;
      plus += signs[i] > 0;
    }
    if (plus > 0 && plus < d) break;
  }
  return hermitize(q * signs.asDiagonal() * q.adjoint());
}

double distance(const Realization& r, const Behaviour& target) {
  const Behaviour q = behaviour_of(r);
  const auto idx = target_coords(target);
  const Eigen::VectorXd p = target_values(target);
  double s = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) s += (q[idx[k]] - p[k]) * (q[idx[k]] - p[k]);
  return std::sqrt(s);
}

// Distance as a function of rho is min over rho of max over ||c|| <= 1 of
// c . (q(rho) - p); exchanging min and max leaves an SDP in (c, s) of size
// independent of d^4, and the multiplier of its operator block is the optimal rho.
StateStep optimize_state(const std::array<CMatrix, 2>& alice, const std::array<CMatrix, 2>& bob,
                         const Behaviour& target, double tol) {
  const int d = static_cast<int>(alice[0].rows());
  const int D = d * d;
  const auto idx = target_coords(target);
  const Eigen::VectorXd p = target_values(target);
  const int k = static_cast<int>(idx.size());
  const int s = k;

  sdp::SdpProblem prob(k + 1);
  prob.objective.head(k) = p;
  prob.objective[s] = -1.0;

  // sum_k c_k O_k - s I >= 0
  auto& op = prob.add_hermitian_block(D);
  for (int i = 0; i < k; ++i) op.coeffs[i] = coordinate_operator(idx[i], alice, bob);
  op.coeffs[s] = -CMatrix::Identity(D, D);

  // [[I, c], [c^T, 1]] >= 0
  auto& ball = prob.add_block(k + 1);
  ball.constant = sdp::RealMatrix::Identity(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    sdp::RealMatrix e = sdp::RealMatrix::Zero(k + 1, k + 1);
    e(i, k) = e(k, i) = 1.0;
    ball.coeffs[i] = e;
  }

  const sdp::SdpSolution sol = sdp::solve(prob, {.tol = tol});
  if (sol.hermitianMultipliers.empty() || !sol.hermitianMultipliers[0].allFinite()) {
    throw SolverError("see-saw state step failed: " + std::string(sdp::to_string(sol.status)));
  }
  StateStep out{to_density(sol.hermitianMultipliers[0]), 0.0};
  Realization r{d, out.rho, alice, bob};
  out.distance = distance(r, target);
  return out;
}

ObservableStep optimize_observables(Party party, const Realization& cur, const Behaviour& target, double tol) {
  const int d = cur.d;
  const HermitianBasis basis(d);
  const int nb = basis.size();
  const int t = 2 * nb;
  const auto idx = target_coords(target);
  const Eigen::VectorXd p = target_values(target);
  const int k = static_cast<int>(idx.size());
  const bool alice = party == Party::Alice;
  const auto& other = alice ? cur.bob : cur.alice;

  // Each coordinate is tr(M O_x) for one of this party's observables (linear)
  // or a constant if it only involves the other party.
  sdp::AffineVector r = sdp::AffineVector::zero(k, t + 1);
  const CMatrix id = CMatrix::Identity(d, d);
  for (int i = 0; i < k; ++i) {
    const int c = idx[i];
    int mine = -1;
    CMatrix m;
    if (c < 4) {
      const bool aliceMarginal = c < 2;
      if (aliceMarginal == alice) {
        mine = c % 2;
        m = alice ? reduce_to_alice(cur.rho, id, d) : reduce_to_bob(cur.rho, id, d);
      } else {
        const CMatrix& o = other[c % 2];
        r.constant[i] = (cur.rho * (alice ? kron(id, o) : kron(o, id))).trace().real();
      }
    } else {
      const int x = (c - 4) / 2, y = (c - 4) % 2;
      mine = alice ? x : y;
      m = alice ? reduce_to_alice(cur.rho, other[y], d) : reduce_to_bob(cur.rho, other[x], d);
    }
    if (mine >= 0) {
      for (int b = 0; b < nb; ++b) r.linear(i, mine * nb + b) = basis.trace_with(m, b);
    }
    r.constant[i] -= p[i];
  }

  sdp::SdpProblem prob(t + 1);
  prob.objective[t] = 1.0;
  for (int o = 0; o < 2; ++o) {
    for (int sign : {-1, 1}) {
      // I + sign * O >= 0
      auto& blk = prob.add_hermitian_block(d);
      blk.constant = id;
      for (int b = 0; b < nb; ++b) blk.coeffs[o * nb + b] = sign * basis.matrix(b, d);
    }
  }
  prob.blocks.push_back(sdp::norm_epigraph_block(r, t, t + 1));

  const sdp::SdpSolution sol = sdp::solve(prob, {.tol = tol});
  if (sol.y.size() != t + 1 || !sol.y.allFinite()) {
    throw SolverError("see-saw observable step failed: " + std::string(sdp::to_string(sol.status)));
  }
  ObservableStep out;
  for (int o = 0; o < 2; ++o) {
    CMatrix m = CMatrix::Zero(d, d);
    for (int b = 0; b < nb; ++b) m += sol.y[o * nb + b] * basis.matrix(b, d);
    out.observables[o] = clip_spectrum(m, -1.0, 1.0);
  }
  Realization next = cur;
  (alice ? next.alice : next.bob) = out.observables;
  out.distance = distance(next, target);
  return out;
}

void SeesawConfig::validate() const {
  if (d < 2) throw DomainError("see-saw dimension must be at least 2");
  if (seeds < 0) throw DomainError("see-saw seed count must be non-negative");
  if (!(threshold > 0)) throw DomainError("see-saw threshold must be positive");
  if (maxSweeps < 1) throw DomainError("see-saw needs at least one sweep per seed");
  if (d * d > sdp::kMaxBlockDimension) {
    throw DomainError("see-saw dimension " + std::to_string(d) + " exceeds the solver block ceiling");
  }
}

std::string to_string(VerdictStatus s) { return s == VerdictStatus::InQdd ? "in_qdd" : "inconclusive"; }

Realization seesaw_seed(const Behaviour& target, const SeesawConfig& cfg, CounterRng rng,
                        std::vector<double>& history) {
  history.clear();
  const int d = cfg.d;
  Realization cur;
  cur.d = d;
  for (int k = 0; k < 2; ++k) cur.alice[k] = random_observable(d, rng);
  for (int k = 0; k < 2; ++k) cur.bob[k] = random_observable(d, rng);
  cur.rho = CMatrix::Identity(d * d, d * d) / (d * d);
  double dist = distance(cur, target);

  for (int sweep = 0; sweep < cfg.maxSweeps; ++sweep) {
    const double before = dist;
    // Far from the target a loose solve is enough: every step is re-scored exactly.
    const double tol = std::clamp(1e-2 * dist, 1e-10, 1e-6);
    // Steps that would increase the distance (possible only through solver
    // inaccuracy) are rejected, keeping the sequence non-increasing.
    StateStep st = optimize_state(cur.alice, cur.bob, target, tol);
    if (st.distance <= dist) {
      cur.rho = st.rho;
      dist = st.distance;
    }
    for (Party party : {Party::Alice, Party::Bob}) {
      if (dist < cfg.threshold) break;
      ObservableStep ob = optimize_observables(party, cur, target, tol);
      if (ob.distance <= dist) {
        (party == Party::Alice ? cur.alice : cur.bob) = ob.observables;
        dist = ob.distance;
      }
    }
    history.push_back(dist);
    if (dist < cfg.threshold || before - dist < cfg.improvementTol) break;
  }
  return cur;
}

SeesawVerdict steered_seesaw(const Behaviour& target, const SeesawConfig& cfg, const CounterRng& rng) {
  cfg.validate();
  if (!in_ns(target)) throw DomainError("see-saw target is outside the no-signalling polytope");
  SeesawVerdict v;
  v.bestDistance = std::numeric_limits<double>::infinity();
  for (int seed = 0; seed < cfg.seeds; ++seed) {
    ++v.seedsTried;
    std::vector<double> history;
    Realization r;
    try {
      r = seesaw_seed(target, cfg, rng.fork(static_cast<std::uint64_t>(seed)), history);
    } catch (const SolverError&) {
      v.failedSeeds.push_back(seed);
      continue;
    }
    // Judge by the realisation itself, not by what the solver reported.
    const double dist = distance(r, target);
    if (dist < v.bestDistance) {
      v.bestDistance = dist;
      v.bestRealization = std::move(r);
      v.seedUsed = seed;
      v.bestSeedHistory = std::move(history);
    }
    if (v.bestDistance < cfg.threshold) break;
  }
  v.status = v.bestDistance < cfg.threshold ? VerdictStatus::InQdd : VerdictStatus::Inconclusive;
  return v;
}

int RoundReport::unclassified() const {
  int n = 0;
  for (const auto& p : points) n += p.round < 0;
  return n;
}

RoundReport round_protocol(const std::vector<Behaviour>& points, const std::vector<RoundSpec>& schedule,
                           const RoundOptions& opts) {
  RoundReport rep;
  rep.points.resize(points.size());
  const CounterRng base(opts.seed);
  for (std::size_t round = 0; round < schedule.size(); ++round) {
    const RoundSpec spec = schedule[round];
    SeesawConfig cfg;
    cfg.d = spec.d;
    cfg.seeds = spec.seeds;
    cfg.threshold = opts.threshold;
    cfg.maxSweeps = opts.maxSweeps;
    cfg.validate();

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (rep.points[i].round < 0) pending.push_back(i);
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<SeesawVerdict> verdicts(pending.size());
    parallel_for(pending.size(), opts.threads, [&](std::size_t j) {
      const std::size_t i = pending[j];
      verdicts[j] = steered_seesaw(points[i], cfg, base.fork(i).fork(round));
    });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    int classified = 0;
    for (std::size_t j = 0; j < pending.size(); ++j) {
      PointOutcome& po = rep.points[pending[j]];
      po.d = spec.d;
      po.distance = verdicts[j].bestDistance;
      if (verdicts[j].status == VerdictStatus::InQdd) {
        po.round = static_cast<int>(round) + 1;
        ++classified;
      }
    }
    rep.rounds.push_back({static_cast<int>(round) + 1, spec.d, spec.seeds, classified, wall});
  }
  return rep;
}

void write_round_csv(const RoundReport& report, std::ostream& out) {
  out << "round,d,seeds,classified,wall_time_s\n";
  for (const auto& r : report.rounds) {
    out << r.round << ',' << r.d << ',' << r.seeds << ',' << r.classified << ',' << r.wallSeconds << '\n';
  }
}

}  // namespace chsh::seesaw

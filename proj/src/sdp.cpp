#include "chsh/sdp.hpp"

#include "chsh/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <string>

namespace chsh::sdp {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::MaxIterations: return "max-iterations";
    case Status::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

RealBlock& SdpProblem::add_block(Eigen::Index n) {
  RealBlock& b = blocks.emplace_back();
  b.constant = RealMatrix::Zero(n, n);
  b.coeffs.assign(numVars, RealMatrix());
  return b;
}

HermitianBlock& SdpProblem::add_hermitian_block(Eigen::Index n) {
  HermitianBlock& b = hermitianBlocks.emplace_back();
  b.constant = HermitianMatrix::Zero(n, n);
  b.coeffs.assign(numVars, HermitianMatrix());
  return b;
}

namespace {

template <typename Matrix>
void validate_block(const BlockT<Matrix>& b, int m, std::string_view what) {
  const Eigen::Index n = b.dim();
  auto fail = [&](const std::string& msg) { throw DomainError(std::string(what) + ": " + msg); };
  if (b.constant.cols() != n) fail("constant matrix is not square");
  if (n > kMaxBlockDimension) fail("block dimension " + std::to_string(n) + " exceeds ceiling");
  if (static_cast<int>(b.coeffs.size()) != m) fail("coefficient list length differs from numVars");
  auto symmetric = [](const Matrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
  };
  if (n > 0 && !symmetric(b.constant)) fail("constant matrix is not symmetric");
  for (const auto& c : b.coeffs) {
    if (c.size() == 0) continue;
    if (c.rows() != n || c.cols() != n) fail("coefficient matrix has wrong shape");
    if (!symmetric(c)) fail("coefficient matrix is not symmetric");
  }
}

}  // namespace

void SdpProblem::validate() const {
  if (objective.size() != numVars) throw DomainError("objective length differs from numVars");
  for (const auto& b : blocks) validate_block(b, numVars, "real block");
  for (const auto& b : hermitianBlocks) validate_block(b, numVars, "hermitian block");
  if (equalities) {
    if (equalities->A.cols() != numVars || equalities->A.rows() != equalities->b.size()) {
      throw DomainError("equality constraint shapes are inconsistent");
    }
  }
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
double inner(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  return std::real(a.conjugate().cwiseProduct(b).sum());
}

template <typename Scalar>
struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Scalar value;
};

// Solver-side coefficient: A_i = -F_i, in sparse or dense form.
template <typename Scalar>
struct Coef {
  int var;
  bool sparse;
  std::vector<Entry<Scalar>> entries;
  Mat<Scalar> dense;

  double dot(const Mat<Scalar>& x) const {
    if (!sparse) return inner<Scalar>(dense, x);
    double s = 0;
    for (const auto& e : entries) s += std::real(std::conj(e.value) * x(e.row, e.col));
    return s;
  }

  void add_to(Mat<Scalar>& out, double w) const {
    if (!sparse) {
      out += w * dense;
      return;
    }
    for (const auto& e : entries) out(e.row, e.col) += w * e.value;
  }

  // G^H A G
  Mat<Scalar> congruence(const Mat<Scalar>& g) const {
    if (!sparse) return g.adjoint() * dense * g;
    const Eigen::Index n = g.cols();
    Mat<Scalar> out = Mat<Scalar>::Zero(n, n);
    for (const auto& e : entries) out.noalias() += e.value * g.row(e.row).adjoint() * g.row(e.col);
    return out;
  }
};

template <typename Scalar>
struct BlockWork {
  Eigen::Index n = 0;
  Mat<Scalar> C;
  std::vector<Coef<Scalar>> coefs;
  Mat<Scalar> X, Z, Rd;

  // Nesterov-Todd scaling: X = G D G^H, Z = G^-H D G^-1 with D = diag(d).
  Mat<Scalar> G;
  Eigen::VectorXd d;
  std::vector<Mat<Scalar>> scaled;
  Mat<Scalar> RdScaled;
  Mat<Scalar> dXs, dZs;

  template <typename Matrix>
  void load(const BlockT<Matrix>& b) {
    n = b.dim();
    C = b.constant;
    for (int i = 0; i < static_cast<int>(b.coeffs.size()); ++i) {
      const auto& f = b.coeffs[i];
      if (f.size() == 0) continue;
      Coef<Scalar> c;
      c.var = i;
      for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index row = 0; row < n; ++row) {
          if (f(row, col) != Scalar(0)) c.entries.push_back({row, col, -f(row, col)});
        }
      }
      if (c.entries.empty()) continue;
      c.sparse = static_cast<Eigen::Index>(c.entries.size()) < 2 * n;
      if (!c.sparse) {
        c.dense = -f;
        c.entries.clear();
      }
      coefs.push_back(std::move(c));
    }
  }

  double norm_a(int var) const {
    for (const auto& c : coefs) {
      if (c.var != var) continue;
      if (!c.sparse) return c.dense.norm();
      double s = 0;
      for (const auto& e : c.entries) s += std::norm(e.value);
      return std::sqrt(s);
    }
    return 0.0;
  }

  void apply_a(const Mat<Scalar>& x, Eigen::VectorXd& out) const {
    for (const auto& c : coefs) out[c.var] += c.dot(x);
  }

  Mat<Scalar> slack(const Eigen::VectorXd& y) const {
    Mat<Scalar> s = C;
    for (const auto& c : coefs) c.add_to(s, -y[c.var]);
    return s;
  }

  // Returns false when X or Z has lost positive definiteness.
  bool compute_scaling() {
    Eigen::LLT<Mat<Scalar>> llt(Z);
    if (llt.info() != Eigen::Success) return false;
    Mat<Scalar> R = llt.matrixL();
    Mat<Scalar> M = R.adjoint() * X * R;
    M = (M + M.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(M);
    if (eig.info() != Eigen::Success) return false;
    const Eigen::VectorXd lam = eig.eigenvalues();
    if (!(lam.minCoeff() > 0)) return false;
    d = lam.cwiseSqrt();
    Mat<Scalar> rhs = eig.eigenvectors() * d.cwiseSqrt().asDiagonal();
    G = R.adjoint().template triangularView<Eigen::Upper>().solve(rhs);
    scaled.clear();
    scaled.reserve(coefs.size());
    for (const auto& c : coefs) scaled.push_back(c.congruence(G));
    RdScaled = G.adjoint() * Rd * G;
    return G.allFinite();
  }

  void add_schur(Eigen::MatrixXd& M) const {
    for (std::size_t a = 0; a < coefs.size(); ++a) {
      for (std::size_t b = a; b < coefs.size(); ++b) {
        const double v = inner<Scalar>(scaled[a], scaled[b]);
        M(coefs[a].var, coefs[b].var) += v;
        if (a != b) M(coefs[b].var, coefs[a].var) += v;
      }
    }
  }

  // rhs_i -= <A~_i, K - Rd~>
  void add_rhs(const Mat<Scalar>& K, Eigen::VectorXd& rhs) const {
    const Mat<Scalar> T = K - RdScaled;
    for (std::size_t a = 0; a < coefs.size(); ++a) rhs[coefs[a].var] -= inner<Scalar>(scaled[a], T);
  }

  void directions(const Mat<Scalar>& K, const Eigen::VectorXd& dy) {
    dZs = RdScaled;
    for (std::size_t a = 0; a < coefs.size(); ++a) dZs -= dy[coefs[a].var] * scaled[a];
    dXs = K - dZs;
  }

  Mat<Scalar> predictor_k() const {
    Mat<Scalar> K = Mat<Scalar>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) K(i, i) = -d[i];
    return K;
  }

  Mat<Scalar> corrector_k(double target) const {
    Mat<Scalar> Q = -0.5 * (dXs * dZs + dZs * dXs);
    for (Eigen::Index i = 0; i < n; ++i) Q(i, i) += target - d[i] * d[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) Q(i, j) *= 2.0 / (d[i] + d[j]);
    }
    return Q;
  }

  // Largest alpha with D + alpha * delta >= 0.
  double max_step(const Mat<Scalar>& delta) const {
    if (n == 0) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
    Mat<Scalar> m = s.asDiagonal() * delta * s.asDiagonal();
    m = (m + m.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(m, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
  }

  double affine_complementarity(double ap, double ad) const {
    Mat<Scalar> x = ap * dXs;
    Mat<Scalar> z = ad * dZs;
    x.diagonal().array() += d.array();
    z.diagonal().array() += d.array();
    return inner<Scalar>(x, z);
  }

  void update(double ap, double ad, const Eigen::VectorXd& dy) {
    X += ap * (G * dXs * G.adjoint());
    X = (X + X.adjoint()).eval() * 0.5;
    Mat<Scalar> dZ = Rd;
    for (const auto& c : coefs) c.add_to(dZ, -dy[c.var]);
    Z += ad * dZ;
    Z = (Z + Z.adjoint()).eval() * 0.5;
  }
};

struct Engine {
  int m;
  Eigen::VectorXd b;  // maximize b . y, i.e. b = -objective
  std::vector<BlockWork<double>> real;
  std::vector<BlockWork<std::complex<double>>> herm;
  Eigen::VectorXd y;

  template <typename F>
  void each(F&& f) {
    for (auto& w : real) f(w);
    for (auto& w : herm) f(w);
  }
  template <typename F>
  void each(F&& f) const {
    for (const auto& w : real) f(w);
    for (const auto& w : herm) f(w);
  }

  double total_dim() const {
    double n = 0;
    each([&](const auto& w) { n += static_cast<double>(w.n); });
    return n;
  }
};

template <typename Scalar, typename Matrix>
void min_eigs(const std::vector<BlockWork<Scalar>>& works, const Eigen::VectorXd& y,
              std::vector<double>& out, std::vector<Matrix>& multipliers) {
  for (const auto& w : works) {
    if (w.n == 0) {
      out.push_back(0.0);
      multipliers.emplace_back();
      continue;
    }
    Mat<Scalar> s = w.slack(y);
    s = (s + s.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(s, Eigen::EigenvaluesOnly);
    out.push_back(eig.eigenvalues().minCoeff());
    multipliers.push_back(w.X);
  }
}

SdpSolution run(const SdpProblem& p, const SolveOptions& opts) {
  Engine e;
  e.m = p.numVars;
  e.b = -p.objective;
  for (const auto& blk : p.blocks) e.real.emplace_back().load(blk);
  for (const auto& blk : p.hermitianBlocks) e.herm.emplace_back().load(blk);
  e.y = Eigen::VectorXd::Zero(e.m);

  // Starting point after Toh, Todd and Tutuncu.
  e.each([&](auto& w) {
    using S = typename std::decay_t<decltype(w.C)>::Scalar;
    const double sn = std::sqrt(static_cast<double>(w.n));
    double xi = std::max(10.0, sn);
    double eta = std::max({10.0, sn, w.C.norm()});
    for (int i = 0; i < e.m; ++i) {
      const double na = w.norm_a(i);
      if (na == 0) continue;
      xi = std::max(xi, sn * (1.0 + std::abs(e.b[i])) / (1.0 + na));
      eta = std::max(eta, na);
    }
    w.X = xi * Mat<S>::Identity(w.n, w.n);
    w.Z = eta * Mat<S>::Identity(w.n, w.n);
  });

  const double N = std::max(1.0, e.total_dim());
  double normC = 0;
  e.each([&](const auto& w) { normC += w.C.squaredNorm(); });
  normC = std::sqrt(normC);
  const double normB = e.b.norm();

  SdpSolution sol;
  sol.status = Status::MaxIterations;
  // Breakdown of a factorization close to the optimum is accepted within 10 tol.
  auto breakdown_status = [&] {
    const bool nearOptimal = sol.dualityGap <= 10 * opts.tol && sol.infeasibility <= 10 * opts.tol;
    return nearOptimal ? Status::Optimal : Status::NumericalFailure;
  };
  double stepMin = 1.0;
  int stalls = 0;

  for (int iter = 0;; ++iter) {
    Eigen::VectorXd ax = Eigen::VectorXd::Zero(e.m);
    double pobj = 0, gap = 0, rdNorm = 0;
    e.each([&](auto& w) {
      w.apply_a(w.X, ax);
      pobj += inner(w.C, w.X);
      gap += inner(w.X, w.Z);
      w.Rd = w.slack(e.y) - w.Z;
      rdNorm += w.Rd.squaredNorm();
    });
    assert(gap >= -1e-12 * (1 + std::abs(pobj)));
    const double dobj = e.b.dot(e.y);
    const Eigen::VectorXd Rp = e.b - ax;
    const double pinf = Rp.norm() / (1.0 + normB);
    const double dinf = std::sqrt(rdNorm) / (1.0 + normC);
    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double relComp = gap / scale;
    const double relGap = std::abs(pobj - dobj) / scale;
    const double mu = gap / N;

    sol.iterations = iter;
    sol.primalObjective = -dobj;
    sol.dualObjective = -pobj;
    sol.dualityGap = std::max(relGap, relComp);
    sol.infeasibility = std::max(pinf, dinf);
    if (opts.recordTrace) sol.trace.push_back({-dobj, -pobj, gap, pinf, dinf});

    if (sol.dualityGap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol) {
      sol.status = Status::Optimal;
      break;
    }
    // A multiplier with A(X) ~ 0 and <C, X> < 0 certifies that no y satisfies the LMIs.
    if (pobj < 0 && ax.norm() <= 1e-8 * -pobj && dinf <= 1e-6) {
      sol.status = Status::Infeasible;
      break;
    }
    if (iter >= opts.maxIter) {
      sol.status = Status::MaxIterations;
      break;
    }

    bool ok = true;
    e.each([&](auto& w) { ok = ok && (w.n == 0 || w.compute_scaling()); });
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(e.m, e.m);
    if (ok) e.each([&](const auto& w) { w.add_schur(M); });
    if (ok && !M.allFinite()) ok = false;
    if (!ok) {
      sol.status = breakdown_status();
      break;
    }
    const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    for (int i = 0; i < e.m; ++i) {
      if (M(i, i) <= reg) M(i, i) += reg;
    }
    Eigen::LDLT<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success) {
      sol.status = breakdown_status();
      break;
    }

    auto solve_direction = [&](auto&& kOf) {
      Eigen::VectorXd rhs = Rp;
      std::vector<Mat<double>> kr;
      std::vector<Mat<std::complex<double>>> kh;
      for (auto& w : e.real) kr.push_back(kOf(w));
      for (auto& w : e.herm) kh.push_back(kOf(w));
      for (std::size_t i = 0; i < e.real.size(); ++i) e.real[i].add_rhs(kr[i], rhs);
      for (std::size_t i = 0; i < e.herm.size(); ++i) e.herm[i].add_rhs(kh[i], rhs);
      Eigen::VectorXd dy = schur.solve(rhs);
      for (std::size_t i = 0; i < e.real.size(); ++i) e.real[i].directions(kr[i], dy);
      for (std::size_t i = 0; i < e.herm.size(); ++i) e.herm[i].directions(kh[i], dy);
      return dy;
    };
    auto step_lengths = [&](double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      e.each([&](const auto& w) {
        ap = std::min(ap, w.max_step(w.dXs));
        ad = std::min(ad, w.max_step(w.dZs));
      });
    };

    // Predictor.
    solve_direction([](const auto& w) { return w.predictor_k(); });
    double apMax, adMax;
    step_lengths(apMax, adMax);
    const double ap0 = std::min(1.0, apMax);
    const double ad0 = std::min(1.0, adMax);
    double affGap = 0;
    e.each([&](const auto& w) { affGap += w.affine_complementarity(ap0, ad0); });
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap0, ad0), 2));
    const double sigma = std::clamp(std::pow(std::max(affGap, 0.0) / gap, expon), 0.0, 1.0);

    // Corrector.
    Eigen::VectorXd dy = solve_direction([&](const auto& w) { return w.corrector_k(sigma * mu); });
    step_lengths(apMax, adMax);
    const double gamma = 0.9 + 0.09 * std::min(ap0, ad0);
    const double ap = std::min(1.0, gamma * apMax);
    const double ad = std::min(1.0, gamma * adMax);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite()) {
      sol.status = breakdown_status();
      break;
    }
    e.each([&](auto& w) { w.update(ap, ad, dy); });
    e.y += ad * dy;

    stepMin = std::min(ap, ad);
    stalls = stepMin < 1e-8 ? stalls + 1 : 0;
    if (stalls >= 5) {
      sol.status = breakdown_status();
      break;
    }
  }

  sol.y = e.y;
  min_eigs(e.real, e.y, sol.minEigenvalues, sol.realMultipliers);
  min_eigs(e.herm, e.y, sol.minEigenvalues, sol.hermitianMultipliers);
  return sol;
}

// Replaces A y = b by y = y0 + N z.
template <typename Matrix>
BlockT<Matrix> reduce_block(const BlockT<Matrix>& blk, const Eigen::VectorXd& y0, const Eigen::MatrixXd& basis) {
  BlockT<Matrix> out;
  out.constant = blk.constant;
  const Eigen::Index n = blk.dim();
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    if (blk.coeffs[i].size() != 0 && y0[i] != 0) out.constant += y0[i] * blk.coeffs[i];
  }
  out.coeffs.resize(basis.cols());
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Matrix acc = Matrix::Zero(n, n);
    bool any = false;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (blk.coeffs[i].size() == 0 || basis(i, j) == 0) continue;
      acc += basis(i, j) * blk.coeffs[i];
      any = true;
    }
    if (any) out.coeffs[j] = std::move(acc);
  }
  return out;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
  problem.validate();
  if (!problem.equalities || problem.equalities->A.rows() == 0) return run(problem, opts);

  const auto& eq = *problem.equalities;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  const Eigen::Index rank = svd.rank();
  const Eigen::VectorXd y0 = svd.solve(eq.b);
  if ((eq.A * y0 - eq.b).norm() > 1e-9 * (1.0 + eq.b.norm())) {
    SdpSolution sol;
    sol.status = Status::Infeasible;
    sol.y = y0;
    return sol;
  }
  const Eigen::MatrixXd basis = svd.matrixV().rightCols(problem.numVars - rank);

  SdpProblem reduced(static_cast<int>(basis.cols()));
  reduced.objective = basis.transpose() * problem.objective;
  for (const auto& blk : problem.blocks) reduced.blocks.push_back(reduce_block(blk, y0, basis));
  for (const auto& blk : problem.hermitianBlocks) reduced.hermitianBlocks.push_back(reduce_block(blk, y0, basis));

  SdpSolution sol = run(reduced, opts);
  const double offset = problem.objective.dot(y0);
  sol.y = y0 + basis * sol.y;
  sol.primalObjective += offset;
  sol.dualObjective += offset;
  for (auto& t : sol.trace) {
    t.primalObjective += offset;
    t.dualObjective += offset;
  }
  return sol;
}

RealBlock norm_epigraph_block(const AffineVector& residual, int tIndex, int numVars) {
  const Eigen::Index k = residual.constant.size();
  if (residual.linear.rows() != k || residual.linear.cols() != numVars) {
    throw DomainError("affine residual has inconsistent shape");
  }
  if (tIndex < 0 || tIndex >= numVars) throw DomainError("epigraph variable index out of range");
  RealBlock blk;
  blk.constant = RealMatrix::Zero(k + 1, k + 1);
  blk.constant.block(0, k, k, 1) = residual.constant;
  blk.constant.block(k, 0, 1, k) = residual.constant.transpose();
  blk.coeffs.assign(numVars, RealMatrix());
  for (int i = 0; i < numVars; ++i) {
    const auto col = residual.linear.col(i);
    const bool isT = i == tIndex;
    if (!isT && col.isZero(0.0)) continue;
    RealMatrix c = RealMatrix::Zero(k + 1, k + 1);
    c.block(0, k, k, 1) = col;
    c.block(k, 0, 1, k) = col.transpose();
    if (isT) c.diagonal().setOnes();
    blk.coeffs[i] = std::move(c);
  }
  return blk;
}

RealMatrix real_embedding(const HermitianMatrix& h) {
  const Eigen::Index n = h.rows();
  RealMatrix out(2 * n, 2 * n);
  out << h.real(), -h.imag(), h.imag(), h.real();
  return out;
}

void write_sdpa(const SdpProblem& problem, std::ostream& out) {
  // SDPA: minimize c.x  s.t.  sum_i F_i x_i - F_0 >= 0, so F_0 here is -constant.
  std::vector<RealBlock> blocks = problem.blocks;
  for (const auto& h : problem.hermitianBlocks) {
    RealBlock r;
    r.constant = real_embedding(h.constant);
    for (const auto& c : h.coeffs) r.coeffs.push_back(c.size() == 0 ? RealMatrix() : real_embedding(c));
    blocks.push_back(std::move(r));
  }
  out << "* chsh sdp dump\n" << problem.numVars << "\n" << blocks.size() << "\n";
  for (const auto& b : blocks) out << b.dim() << " ";
  out << "\n";
  out.precision(17);
  for (int i = 0; i < problem.numVars; ++i) out << problem.objective[i] << (i + 1 < problem.numVars ? " " : "\n");
  if (problem.numVars == 0) out << "\n";
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    auto emit = [&](int mat, const RealMatrix& a, double sign) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i; j < a.cols(); ++j) {
          if (a(i, j) != 0) out << mat << " " << bi + 1 << " " << i + 1 << " " << j + 1 << " " << sign * a(i, j) << "\n";
        }
      }
    };
    emit(0, b.constant, -1.0);
    for (int i = 0; i < problem.numVars; ++i) {
      if (b.coeffs[i].size() != 0) emit(i + 1, b.coeffs[i], 1.0);
    }
  }
  if (problem.equalities) {
    out << "* equalities A y = b (not part of SDPA format)\n";
    for (Eigen::Index r = 0; r < problem.equalities->A.rows(); ++r) {
      out << "*";
      for (Eigen::Index c = 0; c < problem.equalities->A.cols(); ++c) out << " " << problem.equalities->A(r, c);
      out << " = " << problem.equalities->b[r] << "\n";
    }
  }
}

}  // namespace chsh::sdp

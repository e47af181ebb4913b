#pragma once

// Small dense semidefinite programming.
//
//   minimize    objective . y
//   subject to  constant_b + sum_i y_i coeffs_b[i]  >= 0   (PSD) for every block b
//               A y = b                                     (optional)
//
// Blocks are either real symmetric or complex Hermitian. The solver is a
// primal-dual path-following interior point method with Nesterov-Todd scaling
// and Mehrotra predictor-corrector steps; it also returns the dual matrix of
// every block (the multiplier X_b >= 0 with <X_b, coeffs_b[i]> summing to
// objective_i), which callers use to recover primal objects such as states.

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace chsh::sdp {

using RealMatrix = Eigen::MatrixXd;
using HermitianMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxBlockDimension = 64;

/// constant + sum_i y_i coeffs[i] >= 0. An empty coefficient matrix means the
/// variable does not appear in this block.
template <typename Matrix>
struct BlockT {
  Matrix constant;
  std::vector<Matrix> coeffs;

  Eigen::Index dim() const { return constant.rows(); }
};

using RealBlock = BlockT<RealMatrix>;
using HermitianBlock = BlockT<HermitianMatrix>;

struct Equalities {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct SdpProblem {
  int numVars = 0;
  Eigen::VectorXd objective;
  std::vector<RealBlock> blocks;
  std::vector<HermitianBlock> hermitianBlocks;
  std::optional<Equalities> equalities;

  explicit SdpProblem(int m = 0) : numVars(m), objective(Eigen::VectorXd::Zero(m)) {}

  /// Appends an all-zero block of dimension n and returns it for filling.
  RealBlock& add_block(Eigen::Index n);
  HermitianBlock& add_hermitian_block(Eigen::Index n);

  /// Throws DomainError if shapes or symmetry are inconsistent.
  void validate() const;
};

enum class Status { Optimal, Infeasible, MaxIterations, NumericalFailure };
std::string_view to_string(Status s);

struct SolveOptions {
  double tol = 1e-9;
  int maxIter = 200;
  /// Record per-iteration objectives in SdpSolution::trace.
  bool recordTrace = false;
};

struct IterationRecord {
  double primalObjective;  // objective . y (upper bound once feasible)
  double dualObjective;    // lower bound from the block multipliers
  double complementarity;  // sum_b <X_b, S_b(y)>, never negative
  double primalInfeasibility;
  double dualInfeasibility;
};

struct SdpSolution {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd y;
  double primalObjective = 0;
  double dualObjective = 0;
  /// |primal - dual| / (1 + |primal| + |dual|).
  double dualityGap = 0;
  double infeasibility = 0;
  int iterations = 0;
  /// Smallest eigenvalue of each block's slack at y: real blocks first, then
  /// Hermitian blocks.
  std::vector<double> minEigenvalues;
  std::vector<RealMatrix> realMultipliers;
  std::vector<HermitianMatrix> hermitianMultipliers;
  std::vector<IterationRecord> trace;

  bool optimal() const { return status == Status::Optimal; }
};

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});

/// Affine vector expression r(y) = constant + linear * y.
struct AffineVector {
  Eigen::VectorXd constant;
  Eigen::MatrixXd linear;  // rows = constant.size(), cols = numVars

  static AffineVector zero(Eigen::Index rows, int numVars) {
    return {Eigen::VectorXd::Zero(rows), Eigen::MatrixXd::Zero(rows, numVars)};
  }
};

/// The arrow block [[t I, r], [r^T, t]], PSD exactly when ||r(y)||_2 <= y_t.
RealBlock norm_epigraph_block(const AffineVector& residual, int tIndex, int numVars);

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
RealMatrix real_embedding(const HermitianMatrix& h);

/// Writes the problem in SDPA sparse format (Hermitian blocks via their real
/// embedding) for cross-checking with external solvers.
void write_sdpa(const SdpProblem& problem, std::ostream& out);

}  // namespace chsh::sdp

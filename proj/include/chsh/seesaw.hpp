#pragma once

// Steered see-saw: distance from a target behaviour to the set of behaviours
// realisable with local dimension d, by alternating convex steps over the
// state and each party's observables.

#include "chsh/geometry.hpp"
#include "chsh/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace chsh::seesaw {

using CMatrix = Eigen::MatrixXcd;

/// State rho on C^d (x) C^d and two observables per party.
struct Realization {
  int d = 2;
  CMatrix rho;
  std::array<CMatrix, 2> alice;
  std::array<CMatrix, 2> bob;

  /// Throws DomainError unless rho is a density matrix and every observable
  /// has operator norm at most 1 (tolerance 1e-9).
  void validate() const;
};

/// Maximally entangled state with A0 = Z, A1 = X, B_y = (Z +- X)/sqrt(2): the
/// Tsirelson correlations.
Realization tsirelson_realization();

/// Local isometric embedding into dimension newD >= r.d; the behaviour is unchanged.
Realization embed(const Realization& r, int newD);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Expectation values in canonical Full8 order.
Behaviour behaviour_of(const Realization& r);

/// U diag(+-1) U^dagger with Haar-random U and random signs (both signs present).
CMatrix random_observable(int d, CounterRng& rng);

/// 2-norm distance between a realisation and the target; Corr4 targets are
/// compared on the correlators only.
double distance(const Realization& r, const Behaviour& target);

struct StateStep {
  CMatrix rho;
  double distance;
};

/// Globally optimal state for fixed observables, up to the SDP tolerance.
StateStep optimize_state(const std::array<CMatrix, 2>& alice, const std::array<CMatrix, 2>& bob,
                         const Behaviour& target, double tol = 1e-9);

enum class Party { Alice, Bob };

struct ObservableStep {
  std::array<CMatrix, 2> observables;
  double distance;
};

/// Jointly optimal pair of observables for one party (-I <= O <= I), other
/// party and state fixed.
ObservableStep optimize_observables(Party party, const Realization& current, const Behaviour& target,
                                    double tol = 1e-9);

struct SeesawConfig {
  int d = 2;
  int seeds = 50;
  double threshold = 1e-7;
  int maxSweeps = 200;
  double improvementTol = 1e-10;

  void validate() const;
};

enum class VerdictStatus { InQdd, Inconclusive };
std::string to_string(VerdictStatus s);

struct SeesawVerdict {
  VerdictStatus status = VerdictStatus::Inconclusive;
  double bestDistance = 0;
  Realization bestRealization;
  int seedUsed = -1;
  int seedsTried = 0;
  std::vector<int> failedSeeds;
  /// Distance after every sweep of the seed that produced the best realisation.
  std::vector<double> bestSeedHistory;
};

/// Seed i starts from rng.fork(i); the run stops at the first seed whose
/// distance drops below cfg.threshold.
SeesawVerdict steered_seesaw(const Behaviour& target, const SeesawConfig& cfg, const CounterRng& rng);

/// One seed of the see-saw; `history` receives the per-sweep distances.
Realization seesaw_seed(const Behaviour& target, const SeesawConfig& cfg, CounterRng rng,
                        std::vector<double>& history);

struct RoundSpec {
  int d;
  int seeds;
};

struct RoundSummary {
  int round;
  int d;
  int seeds;
  int classified;
  double wallSeconds;
};

struct PointOutcome {
  int round = -1;  // -1: still unclassified
  int d = 0;
  double distance = 0;  // best distance seen in the last round that processed the point
};

struct RoundReport {
  std::vector<PointOutcome> points;
  std::vector<RoundSummary> rounds;

  int unclassified() const;
};

struct RoundOptions {
  std::uint64_t seed = 0;
  int maxSweeps = 200;
  double threshold = 1e-7;
  unsigned threads = 1;
};

/// Applies the schedule in order, each round only to points not yet
/// classified in Q_{dxd}.
RoundReport round_protocol(const std::vector<Behaviour>& points, const std::vector<RoundSpec>& schedule,
                           const RoundOptions& opts);

/// CSV with header round,d,seeds,classified,wall_time_s.
void write_round_csv(const RoundReport& report, std::ostream& out);

}  // namespace chsh::seesaw

#pragma once

// NPA moment matrices for the CHSH scenario and the membership/boundary
// queries answered with them.

#include "chsh/geometry.hpp"
#include "chsh/sdp.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace chsh::npa {

/// Operator word with the parties kept apart. Letters are measurement
/// settings (0 or 1); a reduced party sequence alternates.
struct Word {
  std::vector<int> alice;
  std::vector<int> bob;

  std::size_t length() const { return alice.size() + bob.size(); }
  bool is_identity() const { return alice.empty() && bob.empty(); }
  Word adjoint() const;
  std::string to_string() const;

  auto operator<=>(const Word&) const = default;
};

struct Letter {
  enum Party { Alice, Bob } party;
  int setting;
};

/// A_x^2 = B_y^2 = 1 and [A_x, B_y] = 0.
Word canonicalize(const Word& w);
Word canonicalize(const std::vector<Letter>& letters);

struct NpaLevel {
  enum class Kind { Pure, OnePlusAB } kind = Kind::Pure;
  int n = 1;

  static NpaLevel pure(int n) { return {Kind::Pure, n}; }
  static NpaLevel one_plus_ab() { return {Kind::OnePlusAB, 1}; }

  /// "1", "2", ..., or "1ab" / "1+ab".
  static NpaLevel parse(std::string_view s);
  std::string to_string() const;
  bool operator==(const NpaLevel&) const = default;
};

/// What a cell of the moment matrix holds.
struct MomentRef {
  enum class Kind { Constant, Coordinate, Free } kind;
  /// Constant: value (0 or 1); Coordinate: index into the behaviour; Free: variable index.
  int index;
  double value = 0;
};

struct MomentStructure {
  NpaLevel level;
  Space space;
  std::vector<Word> words;
  std::vector<std::vector<MomentRef>> entries;  // entries[i][j], symmetric
  std::vector<Word> freeWords;                  // freeWords[k] is free variable k

  int size() const { return static_cast<int>(words.size()); }
  int num_free() const { return static_cast<int>(freeWords.size()); }
};

/// Throws DomainError (level too large) when the matrix would exceed the
/// solver's block ceiling.
MomentStructure build_structure(NpaLevel level, Space space);

/// Cached, immutable structure for (level, space). Thread safe.
std::shared_ptr<const MomentStructure> structure(NpaLevel level, Space space);

inline constexpr double kMembershipTolerance = 1e-8;

/// max t such that Gamma(b, y) - t I >= 0 over the free moments y.
double membership_slack(const Behaviour& b, NpaLevel level, const sdp::SolveOptions& opts = {});
bool is_member(const Behaviour& b, NpaLevel level, double tol = kMembershipTolerance);

/// Largest lambda >= 0 with lambda * u in Q_level; u must be a unit vector.
double max_lambda(const Eigen::VectorXd& u, Space space, NpaLevel level, const sdp::SolveOptions& opts = {});

/// max c . b over b in Q_level.
double max_functional(const Eigen::VectorXd& c, Space space, NpaLevel level, const sdp::SolveOptions& opts = {});

/// The SDPs behind the queries above, exposed for inspection and dumping.
sdp::SdpProblem membership_problem(const MomentStructure& s, const Behaviour& b);
sdp::SdpProblem lambda_problem(const MomentStructure& s, const Eigen::VectorXd& u);
sdp::SdpProblem functional_problem(const MomentStructure& s, const Eigen::VectorXd& c);

}  // namespace chsh::npa

#include "chsh/npa.hpp"

#include "chsh/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace chsh::npa {

Word Word::adjoint() const {
  return {std::vector<int>(alice.rbegin(), alice.rend()), std::vector<int>(bob.rbegin(), bob.rend())};
}

std::string Word::to_string() const {
  if (is_identity()) return "1";
  std::string s;
  for (int a : alice) s += "A" + std::to_string(a);
  for (int b : bob) s += "B" + std::to_string(b);
  return s;
}

namespace {

void push_reduced(std::vector<int>& seq, int letter) {
  if (!seq.empty() && seq.back() == letter) {
    seq.pop_back();
  } else {
    seq.push_back(letter);
  }
}

std::vector<int> reduce(const std::vector<int>& seq) {
  std::vector<int> out;
  for (int l : seq) push_reduced(out, l);
  return out;
}

std::vector<int> concat_reduced(const std::vector<int>& left, const std::vector<int>& right) {
  std::vector<int> out = left;
  for (int l : right) push_reduced(out, l);
  return out;
}

// Reduced words of one party with exactly `len` letters.
std::vector<std::vector<int>> party_words(int len) {
  if (len == 0) return {{}};
  std::vector<std::vector<int>> out;
  for (int start = 0; start < 2; ++start) {
    std::vector<int> w(len);
    for (int i = 0; i < len; ++i) w[i] = (start + i) % 2;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

Word canonicalize(const Word& w) { return {reduce(w.alice), reduce(w.bob)}; }

Word canonicalize(const std::vector<Letter>& letters) {
  Word w;
  for (const auto& l : letters) push_reduced(l.party == Letter::Alice ? w.alice : w.bob, l.setting);
  return w;
}

NpaLevel NpaLevel::parse(std::string_view s) {
  if (s == "1ab" || s == "1+ab" || s == "1AB" || s == "1+AB") return one_plus_ab();
  try {
    std::size_t used = 0;
    const int n = std::stoi(std::string(s), &used);
    if (used == s.size() && n >= 1) return pure(n);
  } catch (const std::exception&) {
  }
  throw DomainError("unknown NPA level '" + std::string(s) + "' (expected 1, 1ab, 2, 3, ...)");
}

std::string NpaLevel::to_string() const { return kind == Kind::OnePlusAB ? "1ab" : std::to_string(n); }

MomentStructure build_structure(NpaLevel level, Space space) {
  if (level.kind == NpaLevel::Kind::Pure && level.n < 1) throw DomainError("NPA level must be at least 1");

  MomentStructure s;
  s.level = level;
  s.space = space;
  const int maxLen = level.kind == NpaLevel::Kind::Pure ? level.n : 1;
  // Total word counts grow as 1, 5, 13, 25, 41, 61, 85, ...; stop before generating huge lists.
  if (maxLen > 5) {
    throw DomainError("NPA level " + level.to_string() + " exceeds the moment matrix ceiling of " +
                      std::to_string(sdp::kMaxBlockDimension));
  }
  for (int len = 0; len <= maxLen; ++len) {
    for (int la = len; la >= 0; --la) {
      for (const auto& a : party_words(la)) {
        for (const auto& b : party_words(len - la)) s.words.push_back({a, b});
      }
    }
  }
  if (level.kind == NpaLevel::Kind::OnePlusAB) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) s.words.push_back({{x}, {y}});
    }
  }
  if (s.size() > sdp::kMaxBlockDimension) {
    throw DomainError("NPA level " + level.to_string() + " exceeds the moment matrix ceiling");
  }

  const bool full = space == Space::Full8;
  const int off = full ? 4 : 0;
  std::map<Word, int> freeIndex;
  auto classify = [&](const Word& w) -> MomentRef {
    if (w.is_identity()) return {MomentRef::Kind::Constant, 0, 1.0};
    if (w.alice.size() == 1 && w.bob.empty()) {
      return full ? MomentRef{MomentRef::Kind::Coordinate, w.alice[0]} : MomentRef{MomentRef::Kind::Constant, 0, 0.0};
    }
    if (w.alice.empty() && w.bob.size() == 1) {
      return full ? MomentRef{MomentRef::Kind::Coordinate, 2 + w.bob[0]} : MomentRef{MomentRef::Kind::Constant, 0, 0.0};
    }
    if (w.alice.size() == 1 && w.bob.size() == 1) {
      return {MomentRef::Kind::Coordinate, off + 2 * w.alice[0] + w.bob[0]};
    }
    // Real-symmetric relaxation: <W> and <W^dagger> share one real variable.
    const Word key = std::min(w, w.adjoint());
    auto [it, inserted] = freeIndex.try_emplace(key, static_cast<int>(s.freeWords.size()));
    if (inserted) s.freeWords.push_back(key);
    return {MomentRef::Kind::Free, it->second};
  };

  const int n = s.size();
  s.entries.assign(n, std::vector<MomentRef>(n, MomentRef{MomentRef::Kind::Constant, 0, 0.0}));
  for (int i = 0; i < n; ++i) {
    const Word left = s.words[i].adjoint();
    for (int j = i; j < n; ++j) {
      Word prod{concat_reduced(left.alice, s.words[j].alice), concat_reduced(left.bob, s.words[j].bob)};
      s.entries[i][j] = classify(prod);
      s.entries[j][i] = s.entries[i][j];
    }
  }
  return s;
}

std::shared_ptr<const MomentStructure> structure(NpaLevel level, Space space) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const MomentStructure>> cache;
  const auto key = std::make_tuple(static_cast<int>(level.kind), level.n, static_cast<int>(space));
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto s = std::make_shared<const MomentStructure>(build_structure(level, space));
  cache.emplace(key, s);
  return s;
}

namespace {

// Fills the block for Gamma: constants always, coordinates either as fixed
// numbers (coordValues) or as variables (coordVar(k) >= 0 gives the variable,
// coordWeight(k) its coefficient).
template <typename CoordValue, typename CoordCoeff>
void fill_moment_block(const MomentStructure& s, sdp::RealBlock& blk, int freeOffset, CoordValue&& coordValue,
                       CoordCoeff&& coordCoeff) {
  const int n = s.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const MomentRef& r = s.entries[i][j];
      switch (r.kind) {
        case MomentRef::Kind::Constant: blk.constant(i, j) = r.value; break;
        case MomentRef::Kind::Coordinate: {
          blk.constant(i, j) = coordValue(r.index);
          auto [var, w] = coordCoeff(r.index);
          if (var >= 0 && w != 0.0) {
            auto& c = blk.coeffs[var];
            if (c.size() == 0) c = sdp::RealMatrix::Zero(n, n);
            c(i, j) += w;
          }
          break;
        }
        case MomentRef::Kind::Free: {
          auto& c = blk.coeffs[freeOffset + r.index];
          if (c.size() == 0) c = sdp::RealMatrix::Zero(n, n);
          c(i, j) = 1.0;
          break;
        }
      }
    }
  }
}

void check_space(const MomentStructure& s, Eigen::Index dim) {
  if (dim != dimension(s.space)) throw DomainError("behaviour dimension does not match the moment structure");
}

sdp::SdpSolution solve_or_throw(const sdp::SdpProblem& p, const sdp::SolveOptions& opts, const char* what) {
  sdp::SdpSolution sol = sdp::solve(p, opts);
  if (!sol.optimal()) {
    throw SolverError(std::string(what) + ": SDP finished with status " + std::string(sdp::to_string(sol.status)));
  }
  return sol;
}

}  // namespace

sdp::SdpProblem membership_problem(const MomentStructure& s, const Behaviour& b) {
  check_space(s, b.dim());
  const int m = s.num_free() + 1;
  const int t = m - 1;
  sdp::SdpProblem p(m);
  p.objective[t] = -1.0;
  auto& blk = p.add_block(s.size());
  fill_moment_block(
      s, blk, 0, [&](int k) { return b[k]; }, [](int) { return std::pair{-1, 0.0}; });
  blk.coeffs[t] = -sdp::RealMatrix::Identity(s.size(), s.size());
  return p;
}

sdp::SdpProblem lambda_problem(const MomentStructure& s, const Eigen::VectorXd& u) {
  check_space(s, u.size());
  const int m = s.num_free() + 1;
  const int lam = m - 1;
  sdp::SdpProblem p(m);
  p.objective[lam] = -1.0;
  auto& blk = p.add_block(s.size());
  fill_moment_block(
      s, blk, 0, [](int) { return 0.0; }, [&](int k) { return std::pair{lam, u[k]}; });
  return p;
}

sdp::SdpProblem functional_problem(const MomentStructure& s, const Eigen::VectorXd& c) {
  check_space(s, c.size());
  const int dim = dimension(s.space);
  sdp::SdpProblem p(dim + s.num_free());
  p.objective.head(dim) = -c;
  auto& blk = p.add_block(s.size());
  fill_moment_block(
      s, blk, dim, [](int) { return 0.0; }, [](int k) { return std::pair{k, 1.0}; });
  return p;
}

double membership_slack(const Behaviour& b, NpaLevel level, const sdp::SolveOptions& opts) {
  auto s = structure(level, b.space());
  auto sol = solve_or_throw(membership_problem(*s, b), opts, "NPA membership");
  return sol.y[s->num_free()];
}

bool is_member(const Behaviour& b, NpaLevel level, double tol) { return membership_slack(b, level) >= -tol; }

double max_lambda(const Eigen::VectorXd& u, Space space, NpaLevel level, const sdp::SolveOptions& opts) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw DomainError("max_lambda needs a unit direction");
  auto s = structure(level, space);
  auto sol = solve_or_throw(lambda_problem(*s, u), opts, "NPA max lambda");
  return sol.y[s->num_free()];
}

double max_functional(const Eigen::VectorXd& c, Space space, NpaLevel level, const sdp::SolveOptions& opts) {
  auto s = structure(level, space);
  auto sol = solve_or_throw(functional_problem(*s, c), opts, "NPA functional");
  return -sol.primalObjective;
}

}  // namespace chsh::npa

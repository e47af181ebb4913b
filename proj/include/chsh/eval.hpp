#pragma once

// Evaluation: accuracy summaries, the spread test, two-dimensional slices and
// Monte Carlo volume ratios.

#include "chsh/ml.hpp"
#include "chsh/npa.hpp"
#include "chsh/sampling.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace chsh::eval {

/// Behaviour -> label (1 quantum).
using Classifier = std::function<int(const Behaviour&)>;

Classifier model_classifier(const ml::Model& m);
/// For full8 models applied to full8 behaviours, through composite_full8_predict.
Classifier composite_classifier(const ml::Model& m);
Classifier oracle_classifier(const sampling::Oracle& o);

struct SliceSpec {
  std::string name;
  Behaviour origin = Behaviour::origin(Space::Corr4);
  Eigen::VectorXd e1, e2;
  int resolution = 141;  // per axis; 141^2 ~ 2 x 10^4 points
  double umin = -1, umax = 1, vmin = -1, vmax = 1;

  Space space() const { return origin.space(); }
  Eigen::VectorXd point(double u, double v) const { return origin.coords() + u * e1 + v * e2; }
  /// Throws DomainError unless e1, e2 are orthonormal to 1e-12.
  void validate() const;
};

/// Plane of two orthogonal PR boxes.
SliceSpec slice_pr_pair(int resolution = 141);
/// Plane <A0B0> = <A0B1> = <A1B0>.
SliceSpec slice_equal_correlators(int resolution = 141);
/// Full8 plane through the canonical PR box and the uniform marginal
/// direction (a stand-in, not a published slice).
SliceSpec slice_full8_marginals(int resolution = 141);
/// "slice1", "slice2" or "full8".
SliceSpec named_slice(const std::string& name, int resolution = 141);

struct SlicePoint {
  double u, v;
  bool inNs;
  int label;  // -1 outside ns
};

/// Row-major grid (v outer, u inner) over the slice bounds.
std::vector<SlicePoint> slice_grid(const SliceSpec& spec, const Classifier& c, unsigned threads = 1);

/// Fraction of in-ns grid points where model and truth agree.
double slice_accuracy(const SliceSpec& spec, const Classifier& model, const Classifier& truth, unsigned threads = 1);

void write_slice_csv(const std::vector<SlicePoint>& grid, std::ostream& out);

/// Accuracy of the classifier against the labels of spread_sample.
double spread_test(const Classifier& c, Space space, npa::NpaLevel level, double sigma, int n, std::uint64_t seed,
                   unsigned threads = 1);

struct VolumeResult {
  double ratio = 0;
  double stderr_ = 0;
  double meanTimePerPoint = 0;  // seconds
  int n = 0;
};

/// Fraction of the points accepted by the oracle with its binomial standard error.
VolumeResult volume_ratio(const std::vector<Behaviour>& points, const sampling::Oracle& oracle, unsigned threads = 1);

/// Uniform ns points ("uniform") or simplex points ("simplex").
std::vector<Behaviour> volume_points(const std::string& region, Space space, int n, std::uint64_t seed);

struct SuiteConfig {
  std::vector<sampling::LabelledPoint> test;        // labelled test points
  std::vector<sampling::LabelledPoint> unbalanced;  // labelled uniform points
  std::vector<double> sigmas;                       // spread test
  int spreadPoints = 10000;
  npa::NpaLevel level = npa::NpaLevel::pure(1);
  std::vector<std::string> slices;  // named slices
  int sliceResolution = 141;
  Classifier truth;  // slice ground truth
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct EvalReport {
  ml::Metrics overall;  // on SuiteConfig::test
  std::map<std::string, double> perSuite;
  double runtimeSeconds = 0;
};

EvalReport full_report(const Classifier& model, const SuiteConfig& suites);
std::string report_json(const EvalReport& r);

}  // namespace chsh::eval

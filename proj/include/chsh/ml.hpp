#pragma once

// Classifiers for the quantum/not-quantum problem: an RBF support vector
// machine trained by SMO and a small ReLU/softmax perceptron.

#include "chsh/error.hpp"
#include "chsh/rng.hpp"
#include "chsh/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace chsh::ml {

using sampling::LabelledPoint;

struct SingleClassBatch : DomainError {
  explicit SingleClassBatch(const std::string& what) : DomainError(what) {}
};

struct DivergedLoss : SolverError {
  explicit DivergedLoss(const std::string& what) : SolverError(what) {}
};

// ---- data and metrics

struct SplitDataset {
  std::vector<LabelledPoint> train, validation, test;
  double trainFraction = 0.70;
  double validationFraction = 0.15;
  double testFraction = 0.15;
};

/// Seeded shuffle, then consecutive train/validation/test slices. Runs of
/// groupSize consecutive points move together (2 keeps offset pairs intact, so
/// no point is validated against its own partner).
SplitDataset split_dataset(std::vector<LabelledPoint> points, std::uint64_t seed, double trainFraction = 0.70,
                           double validationFraction = 0.15, int groupSize = 1);

/// Rows are points.
Eigen::MatrixXd features(const std::vector<LabelledPoint>& points);
std::vector<int> labels(const std::vector<LabelledPoint>& points);

struct FocalLossParams {
  double alpha = 1e-2;
  double gamma = 2.0;

  void validate() const;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -alpha (1 - p)^gamma log p, with p clamped below at 1e-12.
double focal_loss(double p, const FocalLossParams& params = {});

/// Cross entropy with each class term weighted by its inverse frequency;
/// probs[i] is the predicted probability of label 1.
double balanced_bce(const std::vector<double>& probs, const std::vector<int>& labels);

/// Mean of the two class recalls. Throws SingleClassBatch unless both classes occur.
double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

struct Metrics {
  double accuracy = 0;
  double balancedAccuracy = 0;  // 0 when only one class is present
  double precision = 0;         // of the quantum class
  double recall = 0;
  double f1 = 0;
};
Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels);

// ---- perceptron

enum class LossKind { Focal, BalancedBce };
std::string to_string(LossKind k);
LossKind parse_loss(const std::string& s);

struct DenseLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

struct MlpModel {
  std::vector<int> layerSizes;  // input, hidden..., 2
  std::vector<DenseLayer> layers;
  bool convexConstrained = false;

  struct TrainingMeta {
    std::string loss;
    std::uint64_t seed = 0;
    int restart = 0;
    int epochs = 0;
    double bestValidation = 0;
  } meta;

  int input_dim() const { return layerSizes.front(); }
  /// Pre-softmax outputs for the rows of x (result: rows x 2).
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
  /// Softmax probabilities (rows x 2).
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;
};

/// Layers after the first are constrained in convex mode: with non-negative
/// weights there and ReLU activations every logit is a convex function of the input.
bool layer_is_constrained(const MlpModel& m, std::size_t layer);

/// He-style initialisation; constrained layers start from absolute values.
MlpModel init_mlp(const std::vector<int>& layerSizes, bool convex, CounterRng& rng);

struct LossSpec {
  LossKind kind = LossKind::Focal;
  FocalLossParams focal;
  /// Per-class weights for the balanced loss (inverse frequency of the training set).
  double weight0 = 1.0, weight1 = 1.0;
};

/// Mean loss over the rows of x and its gradient with respect to every parameter.
struct MlpGradient {
  double loss = 0;
  std::vector<DenseLayer> grads;
};
MlpGradient mlp_gradient(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y, const LossSpec& spec);
double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y, const LossSpec& spec);

struct MlpConfig {
  std::vector<int> hidden{64, 16, 4};
  LossKind loss = LossKind::Focal;
  FocalLossParams focal;
  bool convex = false;
  int restarts = 10;
  std::uint64_t seed = 0;
  double learningRate = 1e-3;
  int batchSize = 64;
  int maxEpochs = 500;
  int patience = 20;
  /// Train on the images of every training point under the 8 CHSH relabellings
  /// (a symmetry of the quantum set); validation and test sets are untouched.
  bool symmetryAugment = false;
  unsigned threads = 1;

  void validate() const;
};

/// Best of cfg.restarts runs by validation balanced accuracy (plain accuracy
/// if the validation set has one class). Adam with early stopping.
MlpModel train_mlp(const SplitDataset& data, const MlpConfig& cfg);

// ---- support vector machine

struct SvmModel {
  Eigen::MatrixXd supportVectors;    // rows
  Eigen::VectorXd dualCoefficients;  // alpha_i y_i
  double bias = 0;
  double kernelGamma = 1;
  double C = 1;
  double validationAccuracy = 0;

  int input_dim() const { return static_cast<int>(supportVectors.cols()); }
  double decision(const Eigen::VectorXd& x) const;
};

struct SmoOptions {
  double tol = 1e-3;
  long maxIterations = 0;  // 0: max(10^7, 100 n)
  std::size_t cacheBytes = std::size_t{256} << 20;
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0;
  long iterations = 0;
};

/// Dual soft-margin SVM with RBF kernel exp(-gamma |x - z|^2), y in {-1, +1}.
/// Working sets by second-order selection. Throws SolverError past maxIterations.
SmoResult smo(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double C, double gamma, const SmoOptions& opts = {});

/// Largest violation of the dual optimality conditions (m(alpha) - M(alpha)).
double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SmoResult& r, double C, double gamma);

SvmModel make_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SmoResult& r, double C, double gamma);

struct SvmGrid {
  std::vector<double> C{0.1, 1, 10, 100, 1000};
  std::vector<double> gamma{0.01, 0.1, 1, 10};
};

struct GridCell {
  double C, gamma, validationAccuracy;
};

/// Model of the grid cell with the best validation accuracy (first on ties).
SvmModel train_svm(const SplitDataset& data, const SvmGrid& grid = {}, unsigned threads = 1,
                   std::vector<GridCell>* cells = nullptr, const SmoOptions& opts = {});

// ---- prediction and storage

using Model = std::variant<MlpModel, SvmModel>;

struct Prediction {
  int label;
  double score;  // MLP: probability of label 1; SVM: decision value
};

int input_dim(const Model& m);
Prediction predict(const Model& m, const Behaviour& b);

/// Local behaviours are quantum; anything else is relabelled so its largest
/// CHSH violation is the canonical one, then classified by the model.
int composite_full8_predict(const Model& m, const Behaviour& b);

inline constexpr int kModelFormatVersion = 1;
std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace chsh::ml

#include "chsh/ml.hpp"

#include "chsh/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <list>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace chsh::ml {

using json = nlohmann::json;

// ---- data and metrics

SplitDataset split_dataset(std::vector<LabelledPoint> points, std::uint64_t seed, double trainFraction,
                           double validationFraction, int groupSize) {
  if (trainFraction < 0 || validationFraction < 0 || trainFraction + validationFraction > 1) {
    throw DomainError("split fractions must be non-negative and sum to at most 1");
  }
  if (groupSize < 1 || points.size() % static_cast<std::size_t>(groupSize) != 0) {
    throw DomainError("dataset size is not a multiple of the group size");
  }
  const std::size_t g = static_cast<std::size_t>(groupSize);
  const std::size_t groups = points.size() / g;
  std::vector<std::size_t> order(groups);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto nTrain = static_cast<std::size_t>(std::llround(trainFraction * static_cast<double>(groups)));
  const auto nVal =
      std::min(groups - nTrain, static_cast<std::size_t>(std::llround(validationFraction * static_cast<double>(groups))));
  SplitDataset s;
  s.trainFraction = trainFraction;
  s.validationFraction = validationFraction;
  s.testFraction = 1 - trainFraction - validationFraction;
  for (std::size_t k = 0; k < groups; ++k) {
    auto& dst = k < nTrain ? s.train : k < nTrain + nVal ? s.validation : s.test;
    for (std::size_t j = 0; j < g; ++j) dst.push_back(std::move(points[order[k] * g + j]));
  }
  return s;
}

Eigen::MatrixXd features(const std::vector<LabelledPoint>& points) {
  if (points.empty()) return {};
  const Eigen::Index dim = points.front().b.dim();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()), dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].b.dim() != dim) throw DomainError("dataset mixes feature dimensions");
    x.row(static_cast<Eigen::Index>(i)) = points[i].b.coords().transpose();
  }
  return x;
}

std::vector<int> labels(const std::vector<LabelledPoint>& points) {
  std::vector<int> y;
  y.reserve(points.size());
  for (const auto& p : points) {
    if (p.label != 0 && p.label != 1) throw DomainError("dataset contains unlabelled points");
    y.push_back(p.label);
  }
  return y;
}

void FocalLossParams::validate() const {
  if (!(alpha > 0)) throw DomainError("focal alpha must be positive");
  if (!(gamma >= 0)) throw DomainError("focal gamma must be non-negative");
}

double focal_loss(double p, const FocalLossParams& params) {
  p = std::max(p, kProbabilityFloor);
  return -params.alpha * std::pow(1 - p, params.gamma) * std::log(p);
}

namespace {

// Inverse-frequency weights averaging the classes that occur.
std::pair<double, double> class_weights(const std::vector<int>& y) {
  const double n = static_cast<double>(y.size());
  const double n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double n0 = n - n1;
  const double k = (n0 > 0) + (n1 > 0);
  return {n0 > 0 ? n / (k * n0) : 0.0, n1 > 0 ? n / (k * n1) : 0.0};
}

}  // namespace

double balanced_bce(const std::vector<double>& probs, const std::vector<int>& y) {
  if (probs.size() != y.size()) throw DomainError("prediction and label counts differ");
  if (y.empty()) return 0;
  const auto [w0, w1] = class_weights(y);
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = y[i] == 1 ? probs[i] : 1 - probs[i];
    total += (y[i] == 1 ? w1 : w0) * -std::log(std::max(p, kProbabilityFloor));
  }
  return total / static_cast<double>(y.size());
}

double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& y) {
  if (preds.size() != y.size()) throw DomainError("prediction and label counts differ");
  std::array<double, 2> hit{}, count{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    count[y[i]] += 1;
    hit[y[i]] += preds[i] == y[i];
  }
  if (count[0] == 0 || count[1] == 0) throw SingleClassBatch("balanced accuracy needs both classes");
  return 0.5 * (hit[0] / count[0] + hit[1] / count[1]);
}

Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& y) {
  if (preds.size() != y.size()) throw DomainError("prediction and label counts differ");
  Metrics m;
  if (y.empty()) return m;
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (preds[i] == 1) {
      (y[i] == 1 ? tp : fp) += 1;
    } else {
      (y[i] == 0 ? tn : fn) += 1;
    }
  }
  m.accuracy = (tp + tn) / static_cast<double>(y.size());
  if (tp + fn > 0 && tn + fp > 0) m.balancedAccuracy = 0.5 * (tp / (tp + fn) + tn / (tn + fp));
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0;
  return m;
}

// ---- perceptron

std::string to_string(LossKind k) { return k == LossKind::Focal ? "focal" : "balanced_bce"; }

LossKind parse_loss(const std::string& s) {
  if (s == "focal") return LossKind::Focal;
  if (s == "balanced_bce" || s == "bce") return LossKind::BalancedBce;
  throw DomainError("unknown loss '" + s + "' (expected focal or balanced_bce)");
}

namespace {

Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const Eigen::VectorXd e = (z.col(c).array() - z.col(c).maxCoeff()).exp();
    p.col(c) = e / e.sum();
  }
  return p;
}

struct Forward {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer (out x N)
  std::vector<Eigen::MatrixXd> post;  // post[0] = input (in x N), post[l+1] = relu(pre[l]) for hidden layers
};

Forward forward(const MlpModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.input_dim()) {
    throw DomainError("model expects " + std::to_string(m.input_dim()) + " features, got " +
                      std::to_string(x.cols()));
  }
  Forward f;
  f.post.push_back(x.transpose());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Eigen::MatrixXd a = m.layers[l].W * f.post.back();
    a.colwise() += m.layers[l].b;
    f.pre.push_back(a);
    if (l + 1 < m.layers.size()) f.post.push_back(a.cwiseMax(0.0));
  }
  return f;
}

}  // namespace

Eigen::MatrixXd MlpModel::logits(const Eigen::MatrixXd& x) const { return forward(*this, x).pre.back().transpose(); }

Eigen::MatrixXd MlpModel::probabilities(const Eigen::MatrixXd& x) const {
  return softmax_cols(forward(*this, x).pre.back()).transpose();
}

bool layer_is_constrained(const MlpModel& m, std::size_t layer) { return m.convexConstrained && layer > 0; }

MlpModel init_mlp(const std::vector<int>& sizes, bool convex, CounterRng& rng) {
  if (sizes.size() < 2 || sizes.back() != 2) throw DomainError("layer sizes must end with 2 outputs");
  for (int s : sizes) {
    if (s < 1) throw DomainError("layer sizes must be positive");
  }
  MlpModel m;
  m.layerSizes = sizes;
  m.convexConstrained = convex;
  std::normal_distribution<double> normal;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    const double scale = std::sqrt(2.0 / sizes[l]);
    layer.W.resize(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < layer.W.size(); ++i) layer.W.data()[i] = scale * normal(rng);
    layer.b = Eigen::VectorXd::Zero(sizes[l + 1]);
    m.layers.push_back(std::move(layer));
  }
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    if (layer_is_constrained(m, l)) m.layers[l].W = m.layers[l].W.cwiseAbs() / std::sqrt(2.0);
  }
  return m;
}

MlpGradient mlp_gradient(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y,
                         const LossSpec& spec) {
  const Forward f = forward(m, x);
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) throw DomainError("feature and label counts differ");
  const Eigen::MatrixXd p = softmax_cols(f.pre.back());

  MlpGradient g;
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(2, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const int t = y[c];
    const double pt = p(t, c);
    double dLdp = 0;
    if (spec.kind == LossKind::Focal) {
      g.loss += focal_loss(pt, spec.focal);
      if (pt > kProbabilityFloor) {
        const double a = spec.focal.alpha, gm = spec.focal.gamma;
        const double q = 1 - pt;
        // d/dp of -a q^g log p; the first term vanishes at p = 1 since log p = 0.
        const double first = q > 0 ? gm * std::pow(q, gm - 1) * std::log(pt) : 0.0;
        dLdp = a * (first - std::pow(q, gm) / pt);
      }
    } else {
      const double w = t == 1 ? spec.weight1 : spec.weight0;
      g.loss += w * -std::log(std::max(pt, kProbabilityFloor));
      if (pt > kProbabilityFloor) dLdp = -w / pt;
    }
    // d p_t / d z_j = p_t (delta_tj - p_j)
    for (int j = 0; j < 2; ++j) delta(j, c) = dLdp * pt * ((j == t ? 1.0 : 0.0) - p(j, c));
  }
  g.loss /= static_cast<double>(n);
  delta /= static_cast<double>(n);

  g.grads.resize(m.layers.size());
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    g.grads[l].W = delta * f.post[l].transpose();
    g.grads[l].b = delta.rowwise().sum();
    if (l > 0) {
      delta = (m.layers[l].W.transpose() * delta).cwiseProduct((f.pre[l - 1].array() > 0).cast<double>().matrix());
    }
  }
  return g;
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y, const LossSpec& spec) {
  const Eigen::MatrixXd p = m.probabilities(x);
  double total = 0;
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    const int t = y[c];
    if (spec.kind == LossKind::Focal) {
      total += focal_loss(p(c, t), spec.focal);
    } else {
      total += (t == 1 ? spec.weight1 : spec.weight0) * -std::log(std::max(p(c, t), kProbabilityFloor));
    }
  }
  return total / static_cast<double>(x.rows());
}

void MlpConfig::validate() const {
  if (restarts < 1 || restarts > 10) throw DomainError("restarts must lie in [1, 10]");
  if (batchSize < 1 || maxEpochs < 1 || patience < 1) throw DomainError("invalid training schedule");
  if (!(learningRate > 0)) throw DomainError("learning rate must be positive");
  focal.validate();
}

namespace {

std::vector<int> predict_labels(const MlpModel& m, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd z = m.logits(x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = z(i, 1) > z(i, 0) ? 1 : 0;
  return out;
}

double selection_score(const std::vector<int>& preds, const std::vector<int>& y) {
  const bool both = std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
  return both ? balanced_accuracy(preds, y) : compute_metrics(preds, y).accuracy;
}

MlpModel train_one(const Eigen::MatrixXd& xt, const std::vector<int>& yt, const Eigen::MatrixXd& xv,
                   const std::vector<int>& yv, const MlpConfig& cfg, const LossSpec& spec, int restart) {
  CounterRng rng = CounterRng(cfg.seed).fork(static_cast<std::uint64_t>(restart));
  std::vector<int> sizes{static_cast<int>(xt.cols())};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2);
  MlpModel m = init_mlp(sizes, cfg.convex, rng);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<DenseLayer> mom(m.layers.size()), vel(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    mom[l] = {Eigen::MatrixXd::Zero(m.layers[l].W.rows(), m.layers[l].W.cols()),
              Eigen::VectorXd::Zero(m.layers[l].b.size())};
    vel[l] = mom[l];
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(xt.rows()));
  std::iota(order.begin(), order.end(), 0);
  MlpModel best = m;
  double bestScore = -1;
  int wait = 0, epoch = 0;
  long step = 0;
  for (epoch = 1; epoch <= cfg.maxEpochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batchSize)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batchSize));
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(stop - start), xt.cols());
      std::vector<int> yb;
      yb.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = xt.row(order[k]);
        yb.push_back(yt[order[k]]);
      }
      const MlpGradient g = mlp_gradient(m, xb, yb, spec);
      if (!std::isfinite(g.loss)) throw DivergedLoss("training loss became non-finite");
      ++step;
      const double c1 = 1 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto adam = [&](auto& param, auto& mo, auto& ve, const auto& grad) {
          mo = beta1 * mo + (1 - beta1) * grad;
          ve = beta2 * ve + (1 - beta2) * grad.cwiseAbs2();
          param.array() -= cfg.learningRate * (mo.array() / c1) / ((ve.array() / c2).sqrt() + eps);
        };
        adam(m.layers[l].W, mom[l].W, vel[l].W, g.grads[l].W);
        adam(m.layers[l].b, mom[l].b, vel[l].b, g.grads[l].b);
        if (layer_is_constrained(m, l)) m.layers[l].W = m.layers[l].W.cwiseMax(0.0);
      }
    }
    const double score = selection_score(predict_labels(m, xv), yv);
    if (score > bestScore) {
      bestScore = score;
      best = m;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
  }
  best.meta.loss = to_string(cfg.loss);
  best.meta.seed = cfg.seed;
  best.meta.restart = restart;
  best.meta.epochs = std::min(epoch, cfg.maxEpochs);
  best.meta.bestValidation = bestScore;
  return best;
}

}  // namespace

MlpModel train_mlp(const SplitDataset& data, const MlpConfig& cfg) {
  cfg.validate();
  if (data.train.empty() || data.validation.empty()) throw DomainError("training needs train and validation points");
  std::vector<LabelledPoint> augmented;
  if (cfg.symmetryAugment) {
    augmented.reserve(8 * data.train.size());
    for (const auto& p : data.train) {
      for (const auto& v : ChshVariant::all()) {
        LabelledPoint q = p;
        q.b = relabel(p.b, v);
        augmented.push_back(std::move(q));
      }
    }
  }
  const Eigen::MatrixXd xt = features(cfg.symmetryAugment ? augmented : data.train);
  const Eigen::MatrixXd xv = features(data.validation);
  if (xt.cols() != 4 && xt.cols() != 8) throw DomainError("feature dimension must be 4 or 8");
  const std::vector<int> yt = labels(cfg.symmetryAugment ? augmented : data.train);
  const std::vector<int> yv = labels(data.validation);
  LossSpec spec;
  spec.kind = cfg.loss;
  spec.focal = cfg.focal;
  std::tie(spec.weight0, spec.weight1) = class_weights(yt);

  std::vector<MlpModel> runs(static_cast<std::size_t>(cfg.restarts));
  parallel_for(runs.size(), cfg.threads,
               [&](std::size_t r) { runs[r] = train_one(xt, yt, xv, yv, cfg, spec, static_cast<int>(r)); });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].meta.bestValidation > runs[best].meta.bestValidation) best = r;
  }
  return runs[best];
}

// ---- support vector machine

namespace {

class KernelRows {
 public:
  KernelRows(const Eigen::MatrixXd& x, double gamma, std::size_t cacheBytes)
      : x_(x), gamma_(gamma), sq_(x.rowwise().squaredNorm()) {
    const std::size_t rowBytes = sizeof(double) * static_cast<std::size_t>(std::max<Eigen::Index>(1, x.rows()));
    capacity_ = std::max<std::size_t>(2, cacheBytes / rowBytes);
  }

  const Eigen::VectorXd& row(Eigen::Index i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    Eigen::VectorXd k = (x_ * x_.row(i).transpose()) * 2.0;
    k = ((k.array() - sq_.array() - sq_[i]) * gamma_).exp();
    lru_.emplace_front(i, std::move(k));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Eigen::MatrixXd& x_;
  double gamma_;
  Eigen::VectorXd sq_;
  std::size_t capacity_;
  std::list<std::pair<Eigen::Index, Eigen::VectorXd>> lru_;
  std::unordered_map<Eigen::Index, std::list<std::pair<Eigen::Index, Eigen::VectorXd>>::iterator> index_;
};

bool in_up(double a, double y, double C) { return (y > 0 && a < C) || (y < 0 && a > 0); }
bool in_low(double a, double y, double C) { return (y > 0 && a > 0) || (y < 0 && a < C); }

double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

}  // namespace

SmoResult smo(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double C, double gamma, const SmoOptions& opts) {
  const Eigen::Index n = x.rows();
  if (y.size() != n) throw DomainError("feature and label counts differ");
  if (!(C > 0) || !(gamma > 0)) throw DomainError("SVM needs positive C and gamma");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) throw DomainError("SMO labels must be +1 or -1");
  }
  SmoResult r;
  r.alpha = Eigen::VectorXd::Zero(n);
  if (n == 0) return r;
  const long maxIter = opts.maxIterations > 0 ? opts.maxIterations : std::max<long>(10'000'000, 100 * n);
  KernelRows K(x, gamma, opts.cacheBytes);
  Eigen::VectorXd G = -Eigen::VectorXd::Ones(n);  // gradient of 1/2 a'Qa - e'a
  Eigen::VectorXd& a = r.alpha;
  constexpr double tau = 1e-12;

  for (;;) {
    // First index: maximal violating -y G over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(a[t], y[t], C) && -y[t] * G[t] >= gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double bestObj = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd* Ki = i >= 0 ? &K.row(i) : nullptr;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(a[t], y[t], C)) continue;
      gmax2 = std::max(gmax2, y[t] * G[t]);
      if (!Ki) continue;
      const double diff = gmax + y[t] * G[t];
      if (diff > 0) {
        double quad = 2.0 - 2.0 * (*Ki)[t];
        if (quad <= 0) quad = tau;
        const double obj = -diff * diff / quad;
        if (obj <= bestObj) {
          bestObj = obj;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < opts.tol) break;
    if (++r.iterations > maxIter) throw SolverError("SMO did not settle within the iteration limit");

    const Eigen::VectorXd Kirow = K.row(i);
    const Eigen::VectorXd& Kj = K.row(j);
    const double Kij = Kirow[j];
    double quad = 2.0 - 2.0 * Kij;
    if (quad <= 0) quad = tau;
    const double oldAi = a[i], oldAj = a[j];
    if (y[i] != y[j]) {
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > C) { a[i] = C; a[j] = C - diff; }
      } else {
        if (a[j] > C) { a[j] = C; a[i] = C + diff; }
      }
    } else {
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) { a[i] = C; a[j] = sum - C; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > C) {
        if (a[j] > C) { a[j] = C; a[i] = sum - C; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double dai = a[i] - oldAi, daj = a[j] - oldAj;
    // Q_ti = y_t y_i K_ti
    G.array() += y.array() * (y[i] * dai * Kirow.array() + y[j] * daj * Kj.array());
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double sum = 0, ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (a[t] > 0 && a[t] < C) {
      sum += yg;
      ++free;
    } else if ((a[t] >= C && y[t] < 0) || (a[t] <= 0 && y[t] > 0)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  const double rho = free > 0 ? sum / free : 0.5 * (ub + lb);
  r.bias = -rho;
  return r;
}

double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SmoResult& r, double C,
                     double gamma) {
  const Eigen::Index n = x.rows();
  double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    double g = -1;
    for (Eigen::Index s = 0; s < n; ++s) {
      if (r.alpha[s] != 0) g += y[t] * y[s] * r.alpha[s] * rbf(x.row(t), x.row(s), gamma);
    }
    const double v = -y[t] * g;
    if (in_up(r.alpha[t], y[t], C)) up = std::max(up, v);
    if (in_low(r.alpha[t], y[t], C)) low = std::min(low, v);
  }
  return (std::isfinite(up) && std::isfinite(low)) ? std::max(0.0, up - low) : 0.0;
}

SvmModel make_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SmoResult& r, double C, double gamma) {
  SvmModel m;
  m.C = C;
  m.kernelGamma = gamma;
  m.bias = r.bias;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < r.alpha.size(); ++i) {
    if (r.alpha[i] > 0) sv.push_back(i);
  }
  m.supportVectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  m.dualCoefficients.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.supportVectors.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
    m.dualCoefficients[static_cast<Eigen::Index>(k)] = r.alpha[sv[k]] * y[sv[k]];
  }
  return m;
}

double SvmModel::decision(const Eigen::VectorXd& x) const {
  if (x.size() != supportVectors.cols() && supportVectors.rows() > 0) {
    throw DomainError("model expects " + std::to_string(supportVectors.cols()) + " features, got " +
                      std::to_string(x.size()));
  }
  if (supportVectors.rows() == 0) return bias;
  const Eigen::VectorXd d2 = (supportVectors.rowwise() - x.transpose()).rowwise().squaredNorm();
  return dualCoefficients.dot((-kernelGamma * d2.array()).exp().matrix()) + bias;
}

SvmModel train_svm(const SplitDataset& data, const SvmGrid& grid, unsigned threads, std::vector<GridCell>* cells,
                   const SmoOptions& opts) {
  if (data.train.empty()) throw DomainError("SVM training set is empty");
  if (grid.C.empty() || grid.gamma.empty()) throw DomainError("SVM grid is empty");
  const Eigen::MatrixXd xt = features(data.train);
  const std::vector<int> yl = labels(data.train);
  Eigen::VectorXd yt(static_cast<Eigen::Index>(yl.size()));
  for (std::size_t i = 0; i < yl.size(); ++i) yt[static_cast<Eigen::Index>(i)] = yl[i] == 1 ? 1.0 : -1.0;
  const std::vector<LabelledPoint>& val = data.validation.empty() ? data.train : data.validation;

  const std::size_t nCells = grid.C.size() * grid.gamma.size();
  std::vector<SvmModel> models(nCells);
  parallel_for(nCells, threads, [&](std::size_t k) {
    const double C = grid.C[k / grid.gamma.size()];
    const double gamma = grid.gamma[k % grid.gamma.size()];
    SvmModel m = make_svm(xt, yt, smo(xt, yt, C, gamma, opts), C, gamma);
    std::size_t correct = 0;
    for (const auto& p : val) correct += (m.decision(p.b.coords()) >= 0 ? 1 : 0) == p.label;
    m.validationAccuracy = static_cast<double>(correct) / static_cast<double>(val.size());
    models[k] = std::move(m);
  });
  std::size_t best = 0;
  for (std::size_t k = 0; k < nCells; ++k) {
    if (cells) cells->push_back({models[k].C, models[k].kernelGamma, models[k].validationAccuracy});
    if (models[k].validationAccuracy > models[best].validationAccuracy) best = k;
  }
  return models[best];
}

// ---- prediction and storage

int input_dim(const Model& m) {
  return std::visit([](const auto& mm) { return mm.input_dim(); }, m);
}

Prediction predict(const Model& m, const Behaviour& b) {
  if (b.dim() != input_dim(m)) {
    throw DomainError("model expects " + std::to_string(input_dim(m)) + " features, got " + std::to_string(b.dim()));
  }
  if (const auto* mlp = std::get_if<MlpModel>(&m)) {
    const Eigen::MatrixXd p = mlp->probabilities(b.coords().transpose());
    return {p(0, 1) > p(0, 0) ? 1 : 0, p(0, 1)};
  }
  const double f = std::get<SvmModel>(m).decision(b.coords());
  return {f >= 0 ? 1 : 0, f};
}

int composite_full8_predict(const Model& m, const Behaviour& b) {
  if (b.space() != Space::Full8) throw DomainError("composite prediction needs a full8 behaviour");
  if (local_membership(b)) return 1;
  return predict(m, relabel(b, dominant_variant(b))).label;
}

namespace {

json matrix_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) r[static_cast<std::size_t>(j)] = a(i, j);
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto r = j[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != cols) throw IoError("model matrix has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) a(static_cast<Eigen::Index>(i), c) = r[static_cast<std::size_t>(c)];
  }
  return a;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j;
  j["format"] = "chshml-model";
  j["version"] = kModelFormatVersion;
  if (const auto* m = std::get_if<MlpModel>(&model)) {
    j["kind"] = "mlp";
    j["layerSizes"] = m->layerSizes;
    j["convex"] = m->convexConstrained;
    json layers = json::array();
    for (const auto& l : m->layers) layers.push_back({{"W", matrix_json(l.W)}, {"b", vector_json(l.b)}});
    j["layers"] = layers;
    j["meta"] = {{"loss", m->meta.loss},
                 {"seed", m->meta.seed},
                 {"restart", m->meta.restart},
                 {"epochs", m->meta.epochs},
                 {"bestValidation", m->meta.bestValidation}};
  } else {
    const auto& s = std::get<SvmModel>(model);
    j["kind"] = "svm";
    j["inputDim"] = s.supportVectors.cols();
    j["C"] = s.C;
    j["gamma"] = s.kernelGamma;
    j["bias"] = s.bias;
    j["validationAccuracy"] = s.validationAccuracy;
    j["supportVectors"] = matrix_json(s.supportVectors);
    j["dualCoefficients"] = vector_json(s.dualCoefficients);
  }
  return j.dump(1);
}

Model model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "chshml-model") throw IoError("not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion) throw IoError("unsupported model version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mlp") {
      MlpModel m;
      m.layerSizes = j.at("layerSizes").get<std::vector<int>>();
      m.convexConstrained = j.at("convex").get<bool>();
      const json& layers = j.at("layers");
      if (layers.size() + 1 != m.layerSizes.size()) throw IoError("layer count does not match sizes");
      for (std::size_t l = 0; l < layers.size(); ++l) {
        DenseLayer d{json_matrix(layers[l].at("W"), m.layerSizes[l]), json_vector(layers[l].at("b"))};
        if (d.W.rows() != m.layerSizes[l + 1] || d.b.size() != m.layerSizes[l + 1]) {
          throw IoError("layer shape does not match sizes");
        }
        m.layers.push_back(std::move(d));
      }
      const json& meta = j.at("meta");
      m.meta.loss = meta.at("loss").get<std::string>();
      m.meta.seed = meta.at("seed").get<std::uint64_t>();
      m.meta.restart = meta.at("restart").get<int>();
      m.meta.epochs = meta.at("epochs").get<int>();
      m.meta.bestValidation = meta.at("bestValidation").get<double>();
      return m;
    }
    if (kind == "svm") {
      SvmModel s;
      const auto dim = j.at("inputDim").get<Eigen::Index>();
      s.C = j.at("C").get<double>();
      s.kernelGamma = j.at("gamma").get<double>();
      s.bias = j.at("bias").get<double>();
      s.validationAccuracy = j.at("validationAccuracy").get<double>();
      s.supportVectors = json_matrix(j.at("supportVectors"), dim);
      s.dualCoefficients = json_vector(j.at("dualCoefficients"));
      if (s.dualCoefficients.size() != s.supportVectors.rows()) throw IoError("coefficient count mismatch");
      return s;
    }
    throw IoError("unknown model kind '" + kind + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const Model& m, const std::string& path) {
  const std::string text = model_to_json(m);
  // Written beside the target and renamed, so a failure never leaves a partial model.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw IoError("cannot open '" + tmp + "' for writing");
    f << text << '\n';
    if (!f) {
      std::remove(tmp.c_str());
      throw IoError("failed writing '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move model into '" + path + "'");
  }
}

Model load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace chsh::ml

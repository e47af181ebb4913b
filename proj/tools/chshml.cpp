// chshml: dataset generation, membership oracles, training and evaluation for
// the CHSH scenario.

#include "chsh/eval.hpp"
#include "chsh/geometry.hpp"
#include "chsh/ml.hpp"
#include "chsh/npa.hpp"
#include "chsh/parallel.hpp"
#include "chsh/sampling.hpp"
#include "chsh/seesaw.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

using namespace chsh;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Globals {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;

  /// The explicit seed, or a fresh one that the caller must record.
  std::uint64_t resolve_seed() const {
    if (seed) return *seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void write_json(const json& j, const std::string& path) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::vector<sampling::LabelledPoint> read_many(const std::vector<std::string>& paths) {
  std::vector<sampling::LabelledPoint> all;
  for (const auto& p : paths) {
    auto part = sampling::read_jsonl(p);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::string default_oracle(Space s) { return s == Space::Corr4 ? "tlm" : "npa:1ab"; }

Space model_space(const ml::Model& m) {
  const int dim = ml::input_dim(m);
  if (dim == 4) return Space::Corr4;
  if (dim == 8) return Space::Full8;
  throw DomainError("model input dimension " + std::to_string(dim) + " is neither 4 nor 8");
}

// ---- generate

struct GenerateArgs {
  std::string space = "corr4";
  std::string method = "uniform";
  int n = 1000;
  std::string oracle;
  double epsilon = 1e-3;
  double sigma = 1e-2;
  double shell = 0.01;
  std::string level = "1ab";
  bool facetOnly = false;
  std::string out;
};

void cmd_generate(const GenerateArgs& a, const Globals& g) {
  if (a.n < 0) throw DomainError("--n must be non-negative");
  const Space space = parse_space(a.space);
  const std::uint64_t seed = g.resolve_seed();
  const auto level = npa::NpaLevel::parse(a.level);
  const std::string oracleSpec = a.oracle.empty() ? default_oracle(space) : a.oracle;
  const auto t0 = Clock::now();

  std::vector<sampling::LabelledPoint> pts;
  json meta{{"method", a.method}, {"space", to_string(space)}, {"n", a.n}, {"seed", seed}};
  if (a.method == "uniform" || a.method == "balanced") {
    const auto oracle = sampling::make_oracle(oracleSpec);
    pts = sampling::sample_uniform(space, a.n, oracle, a.method == "balanced", seed, g.threads);
    meta["oracle"] = oracle.name;
  } else if (a.method == "offset") {
    sampling::OffsetConfig cfg{a.epsilon, level};
    pts = sampling::sample_offset(space, a.n, cfg, seed, a.facetOnly, g.threads);
    meta["level"] = level.to_string();
    meta["epsilon"] = a.epsilon;
    meta["facet_only"] = a.facetOnly;
  } else if (a.method == "spread") {
    pts = sampling::spread_sample(space, {a.sigma, a.shell}, level, a.n, seed, g.threads);
    meta["level"] = level.to_string();
    meta["sigma"] = a.sigma;
    meta["shell_thickness"] = a.shell;
  } else if (a.method == "simplex") {
    if (space != Space::Full8) throw DomainError("the simplex method needs --space full8");
    const auto oracle = sampling::make_oracle(oracleSpec);
    CounterRng rng(seed);
    const auto raw = sampling::sample_simplex(a.n, rng);
    pts.resize(raw.size());
    parallel_for(raw.size(), g.threads, [&](std::size_t i) {
      pts[i].b = raw[i];
      pts[i].label = oracle.contains(raw[i]) ? sampling::kQuantum : sampling::kNotQuantum;
      pts[i].meta = {"simplex", std::nullopt, std::nullopt, oracle.name, seed};
    });
    meta["oracle"] = oracle.name;
  } else {
    throw DomainError("unknown method '" + a.method + "' (uniform, balanced, offset, spread, simplex)");
  }

  sampling::write_jsonl(pts, a.out);
  int quantum = 0;
  for (const auto& p : pts) quantum += p.label == sampling::kQuantum;
  meta["written"] = pts.size();
  meta["quantum"] = quantum;
  meta["wall_time_s"] = seconds_since(t0);
  write_json(meta, a.out + ".meta.json");
  std::cout << "wrote " << pts.size() << " points (" << quantum << " quantum) to " << a.out << '\n';
}

// ---- classify

struct ClassifyArgs {
  std::string in, out, oracle = "tlm", timing;
};

void cmd_classify(const ClassifyArgs& a, const Globals& g) {
  auto pts = sampling::read_jsonl(a.in, false);
  const auto oracle = sampling::make_oracle(a.oracle);
  std::vector<double> secs(pts.size());
  const auto t0 = Clock::now();
  parallel_for(pts.size(), g.threads, [&](std::size_t i) {
    const auto s = Clock::now();
    pts[i].label = oracle.contains(pts[i].b) ? sampling::kQuantum : sampling::kNotQuantum;
    pts[i].meta.level = oracle.name;
    secs[i] = seconds_since(s);
  });
  const double wall = seconds_since(t0);
  sampling::write_jsonl(pts, a.out);
  if (!a.timing.empty()) {
    auto f = open_out(a.timing);
    f << "index,seconds\n";
    for (std::size_t i = 0; i < secs.size(); ++i) f << i << ',' << secs[i] << '\n';
  }
  double total = 0;
  int quantum = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    total += secs[i];
    quantum += pts[i].label;
  }
  json meta{{"oracle", oracle.name},
            {"input", a.in},
            {"n", pts.size()},
            {"quantum", quantum},
            {"mean_time_per_point_s", pts.empty() ? 0.0 : total / static_cast<double>(pts.size())},
            {"wall_time_s", wall}};
  write_json(meta, a.out + ".meta.json");
  std::cout << "classified " << pts.size() << " points with " << oracle.name << " (" << quantum << " quantum)\n";
}

// ---- train

struct TrainArgs {
  std::vector<std::string> data;
  std::string model = "svm";
  std::string out;
  double trainFraction = 0.70, validationFraction = 0.15;
  int groupSize = 0;  // 0: 2 for offset datasets, else 1
  // mlp
  std::string loss = "focal";
  double alpha = 1e-2, gamma = 2;
  bool convex = false;
  int restarts = 10;
  double lr = 1e-3;
  int batch = 64, maxEpochs = 500, patience = 20;
  bool symmetryAugment = false;
  std::vector<int> hidden{64, 16, 4};
  // svm
  std::vector<double> gridC{0.1, 1, 10, 100, 1000};
  std::vector<double> gridGamma{0.01, 0.1, 1, 10};
};

void cmd_train(const TrainArgs& a, const Globals& g) {
  const auto t0 = Clock::now();
  const std::uint64_t seed = g.resolve_seed();
  auto pts = read_many(a.data);
  int group = a.groupSize;
  if (group == 0) {
    const bool pairs = !pts.empty() && std::all_of(pts.begin(), pts.end(), [](const auto& p) {
      return p.meta.method == "offset";
    });
    group = pairs ? 2 : 1;
  }
  const auto split = ml::split_dataset(std::move(pts), seed, a.trainFraction, a.validationFraction, group);

  ml::Model model;
  json info{{"seed", seed}, {"kind", a.model}, {"group_size", group}, {"train", split.train.size()},
            {"validation", split.validation.size()}, {"test", split.test.size()}};
  if (a.model == "svm") {
    std::vector<ml::GridCell> cells;
    auto svm = ml::train_svm(split, {a.gridC, a.gridGamma}, g.threads, &cells);
    info["C"] = svm.C;
    info["gamma"] = svm.kernelGamma;
    info["support_vectors"] = svm.supportVectors.rows();
    json grid = json::array();
    for (const auto& c : cells) grid.push_back({{"C", c.C}, {"gamma", c.gamma}, {"validation", c.validationAccuracy}});
    info["grid"] = grid;
    model = std::move(svm);
  } else if (a.model == "mlp") {
    ml::MlpConfig cfg;
    cfg.hidden = a.hidden;
    cfg.loss = ml::parse_loss(a.loss);
    cfg.focal = {a.alpha, a.gamma};
    cfg.convex = a.convex;
    cfg.restarts = a.restarts;
    cfg.seed = seed;
    cfg.learningRate = a.lr;
    cfg.batchSize = a.batch;
    cfg.maxEpochs = a.maxEpochs;
    cfg.patience = a.patience;
    cfg.symmetryAugment = a.symmetryAugment;
    cfg.threads = g.threads;
    auto mlp = ml::train_mlp(split, cfg);
    info["restart"] = mlp.meta.restart;
    info["epochs"] = mlp.meta.epochs;
    info["best_validation"] = mlp.meta.bestValidation;
    model = std::move(mlp);
  } else {
    throw DomainError("unknown model kind '" + a.model + "' (svm or mlp)");
  }

  if (!split.test.empty()) {
    const auto c = eval::model_classifier(model);
    std::vector<int> preds;
    for (const auto& p : split.test) preds.push_back(c(p.b));
    const auto m = ml::compute_metrics(preds, ml::labels(split.test));
    info["test_accuracy"] = m.accuracy;
    info["test_balanced_accuracy"] = m.balancedAccuracy;
  }
  ml::save_model(model, a.out);
  info["wall_time_s"] = seconds_since(t0);
  write_json(info, a.out + ".meta.json");
  std::cout << info.dump(2) << '\n';
}

// ---- eval

struct EvalArgs {
  std::string model, out;
  std::vector<std::string> test, unbalanced;
  std::vector<double> sigmas;
  int spreadPoints = 10000;
  std::string level = "1";
  std::vector<std::string> slices;
  int resolution = 141;
  std::string truth;
  bool composite = false;
};

void cmd_eval(const EvalArgs& a, const Globals& g) {
  const auto model = ml::load_model(a.model);
  const Space space = model_space(model);
  eval::SuiteConfig cfg;
  if (!a.test.empty()) cfg.test = read_many(a.test);
  if (!a.unbalanced.empty()) cfg.unbalanced = read_many(a.unbalanced);
  cfg.sigmas = a.sigmas;
  cfg.spreadPoints = a.spreadPoints;
  cfg.level = npa::NpaLevel::parse(a.level);
  cfg.slices = a.slices;
  cfg.sliceResolution = a.resolution;
  cfg.truth = eval::oracle_classifier(sampling::make_oracle(a.truth.empty() ? default_oracle(space) : a.truth));
  cfg.seed = g.resolve_seed();
  cfg.threads = g.threads;
  const auto classifier = a.composite ? eval::composite_classifier(model) : eval::model_classifier(model);
  const auto report = eval::full_report(classifier, cfg);
  auto j = json::parse(eval::report_json(report));
  j["seed"] = cfg.seed;
  if (!a.out.empty()) write_json(j, a.out);
  std::cout << j.dump(2) << '\n';
}

// ---- slice

struct SliceArgs {
  std::string model, oracle, slice = "slice1", out;
  int resolution = 141;
  bool composite = false;
};

void cmd_slice(const SliceArgs& a, const Globals& g) {
  if (a.model.empty() == a.oracle.empty()) throw DomainError("give exactly one of --model and --oracle");
  eval::Classifier c;
  if (!a.model.empty()) {
    const auto m = ml::load_model(a.model);
    c = a.composite ? eval::composite_classifier(m) : eval::model_classifier(m);
  } else {
    c = eval::oracle_classifier(sampling::make_oracle(a.oracle));
  }
  const auto grid = eval::slice_grid(eval::named_slice(a.slice, a.resolution), c, g.threads);
  auto f = open_out(a.out);
  eval::write_slice_csv(grid, f);
  std::cout << "wrote " << a.slice << " grid to " << a.out << '\n';
}

// ---- volume

struct VolumeArgs {
  std::string space = "corr4", region = "uniform", out;
  std::vector<std::string> oracles{"tlm"};
  int n = 100000;
};

void cmd_volume(const VolumeArgs& a, const Globals& g) {
  const Space space = parse_space(a.space);
  const std::uint64_t seed = g.resolve_seed();
  const auto pts = eval::volume_points(a.region, space, a.n, seed);
  std::ostringstream csv;
  csv << "level,ratio,stderr,tPerPoint\n";
  csv.precision(10);
  for (const auto& spec : a.oracles) {
    const auto oracle = sampling::make_oracle(spec);
    const auto r = eval::volume_ratio(pts, oracle, g.threads);
    csv << oracle.name << ',' << r.ratio << ',' << r.stderr_ << ',' << r.meanTimePerPoint << '\n';
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    auto f = open_out(a.out);
    f << csv.str();
    write_json({{"region", a.region}, {"space", to_string(space)}, {"n", a.n}, {"seed", seed}}, a.out + ".meta.json");
  }
}

// ---- appendixa

struct AppendixArgs {
  int n = 100;
  int d = 6;
  int seeds = 50;
  int maxSweeps = 200;
  double threshold = 1e-7;
  std::string histogram, points, summary;
};

void cmd_appendixa(const AppendixArgs& a, const Globals& g) {
  if (a.n < 1) throw DomainError("--n must be positive");
  const std::uint64_t seed = g.resolve_seed();
  const auto t0 = Clock::now();
  CounterRng dirRng = CounterRng(seed).fork(0);
  std::vector<Eigen::VectorXd> dirs;
  long drawn = 0;
  while (static_cast<int>(dirs.size()) < a.n) {
    auto u = sampling::random_direction(8, dirRng);
    ++drawn;
    if (sampling::exits_through_canonical_facet(u)) dirs.push_back(std::move(u));
  }

  seesaw::SeesawConfig cfg;
  cfg.d = a.d;
  cfg.seeds = a.seeds;
  cfg.maxSweeps = a.maxSweeps;
  cfg.threshold = a.threshold;
  cfg.validate();
  const CounterRng base = CounterRng(seed).fork(1);
  std::vector<double> lambda(dirs.size()), dist(dirs.size());
  std::vector<int> seedsTried(dirs.size());
  parallel_for(dirs.size(), g.threads, [&](std::size_t i) {
    lambda[i] = npa::max_lambda(dirs[i], Space::Full8, npa::NpaLevel::one_plus_ab());
    const Behaviour target(Space::Full8, lambda[i] * dirs[i]);
    const auto v = seesaw::steered_seesaw(target, cfg, base.fork(i));
    dist[i] = v.bestDistance;
    seedsTried[i] = v.seedsTried;
  });

  // Decade bins from 1e-10 up to 1; the first and last bins absorb the tails.
  constexpr int kLo = -10, kHi = 0;
  std::vector<int> bins(kHi - kLo, 0);
  for (double x : dist) {
    const int e = static_cast<int>(std::floor(std::log10(std::max(x, 1e-300))));
    bins[std::clamp(e, kLo, kHi - 1) - kLo]++;
  }
  int below2 = 0, below3 = 0, below7 = 0;
  for (double x : dist) {
    below2 += x < 1e-2;
    below3 += x < 1e-3;
    below7 += x < 1e-7;
  }
  if (!a.histogram.empty()) {
    auto f = open_out(a.histogram);
    f << "log10_lo,log10_hi,count\n";
    for (int k = 0; k < kHi - kLo; ++k) f << kLo + k << ',' << kLo + k + 1 << ',' << bins[k] << '\n';
  }
  if (!a.points.empty()) {
    auto f = open_out(a.points);
    f.precision(17);
    f << "index,lambda,distance,seeds_tried\n";
    for (std::size_t i = 0; i < dist.size(); ++i) {
      f << i << ',' << lambda[i] << ',' << dist[i] << ',' << seedsTried[i] << '\n';
    }
  }
  const double n = static_cast<double>(dist.size());
  json s{{"n", dist.size()},
         {"d", a.d},
         {"seeds", a.seeds},
         {"seed", seed},
         {"directions_drawn", drawn},
         {"below_1e-2", below2},
         {"below_1e-3", below3},
         {"below_1e-7", below7},
         {"fraction_below_1e-2", below2 / n},
         {"wall_time_s", seconds_since(t0)}};
  if (!a.summary.empty()) write_json(s, a.summary);
  std::cout << s.dump(2) << '\n';
}

// ---- rounds

struct RoundsArgs {
  std::string in, out, points;
  std::vector<std::string> schedule{"2:10", "3:10", "4:10", "6:10", "8:10"};
  int maxSweeps = 200;
  double threshold = 1e-7;
};

std::vector<seesaw::RoundSpec> parse_schedule(const std::vector<std::string>& items) {
  std::vector<seesaw::RoundSpec> out;
  for (const auto& s : items) {
    seesaw::RoundSpec r{};
    char colon = 0;
    std::istringstream in(s);
    if (!(in >> r.d >> colon >> r.seeds) || colon != ':' || !in.eof()) {
      throw DomainError("schedule entries look like <d>:<seeds>, got '" + s + "'");
    }
    out.push_back(r);
  }
  return out;
}

void cmd_rounds(const RoundsArgs& a, const Globals& g) {
  const auto pts = sampling::read_jsonl(a.in, false);
  std::vector<Behaviour> bs;
  for (const auto& p : pts) bs.push_back(p.b);
  seesaw::RoundOptions opts;
  opts.seed = g.resolve_seed();
  opts.maxSweeps = a.maxSweeps;
  opts.threshold = a.threshold;
  opts.threads = g.threads;
  const auto report = seesaw::round_protocol(bs, parse_schedule(a.schedule), opts);
  {
    auto f = open_out(a.out);
    seesaw::write_round_csv(report, f);
  }
  if (!a.points.empty()) {
    auto f = open_out(a.points);
    f.precision(17);
    f << "index,round,d,distance\n";
    for (std::size_t i = 0; i < report.points.size(); ++i) {
      const auto& p = report.points[i];
      f << i << ',' << p.round << ',' << p.d << ',' << p.distance << '\n';
    }
  }
  std::cout << "seed " << opts.seed << ": " << report.unclassified() << " of " << bs.size()
            << " points left unclassified\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum correlation sets of the CHSH scenario: oracles, datasets, classifiers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; sections are named after subcommands");
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)");
  app.add_option("--seed", g.seed, "Seed for every random choice; generated and recorded when omitted");

  GenerateArgs gen;
  auto* sg = app.add_subcommand("generate", "Sample a labelled dataset");
  sg->add_option("--space", gen.space, "corr4 or full8")->capture_default_str();
  sg->add_option("--method", gen.method, "uniform, balanced, offset, spread or simplex")->capture_default_str();
  sg->add_option("--n", gen.n, "Number of points")->capture_default_str();
  sg->add_option("--oracle", gen.oracle, "Labelling oracle for uniform, balanced and simplex");
  sg->add_option("--epsilon", gen.epsilon, "Offset around the boundary")->capture_default_str();
  sg->add_option("--sigma", gen.sigma, "Spread width")->capture_default_str();
  sg->add_option("--shell", gen.shell, "Spread shell thickness")->capture_default_str();
  sg->add_option("--level", gen.level, "NPA level for offset and spread")->capture_default_str();
  sg->add_flag("--facet-only", gen.facetOnly, "Offset directions through the canonical CHSH facet");
  sg->add_option("--out", gen.out, "Output JSONL")->required();

  ClassifyArgs cls;
  auto* sc = app.add_subcommand("classify", "Label behaviours with a membership oracle");
  sc->add_option("--in", cls.in, "Input JSONL")->required();
  sc->add_option("--out", cls.out, "Output JSONL")->required();
  sc->add_option("--oracle", cls.oracle, "tlm, local, npa:<level> or seesaw:<d>,<seeds>")->capture_default_str();
  sc->add_option("--timing", cls.timing, "CSV of per-point oracle times");

  TrainArgs tr;
  auto* st = app.add_subcommand("train", "Train an SVM or MLP");
  st->add_option("--data", tr.data, "Labelled JSONL files")->required();
  st->add_option("--model", tr.model, "svm or mlp")->capture_default_str();
  st->add_option("--out", tr.out, "Model file")->required();
  st->add_option("--train-fraction", tr.trainFraction)->capture_default_str();
  st->add_option("--validation-fraction", tr.validationFraction)->capture_default_str();
  st->add_option("--group-size", tr.groupSize, "Points kept together by the split (0: pairs for offset data)")
      ->capture_default_str();
  st->add_option("--loss", tr.loss, "focal or balanced_bce")->capture_default_str();
  st->add_option("--alpha", tr.alpha, "Focal alpha")->capture_default_str();
  st->add_option("--gamma", tr.gamma, "Focal gamma")->capture_default_str();
  st->add_flag("--convex", tr.convex, "Non-negative weights after the first layer");
  st->add_option("--restarts", tr.restarts)->capture_default_str();
  st->add_option("--lr", tr.lr)->capture_default_str();
  st->add_option("--batch", tr.batch)->capture_default_str();
  st->add_option("--max-epochs", tr.maxEpochs)->capture_default_str();
  st->add_option("--patience", tr.patience)->capture_default_str();
  st->add_flag("--symmetry-augment", tr.symmetryAugment, "Train on all 8 CHSH relabellings");
  st->add_option("--hidden", tr.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
  st->add_option("--grid-c", tr.gridC, "SVM C grid")->delimiter(',')->capture_default_str();
  st->add_option("--grid-gamma", tr.gridGamma, "SVM gamma grid")->delimiter(',')->capture_default_str();

  EvalArgs ev;
  auto* se = app.add_subcommand("eval", "Evaluate a model");
  se->add_option("--model", ev.model)->required();
  se->add_option("--test", ev.test, "Labelled test JSONL files");
  se->add_option("--unbalanced", ev.unbalanced, "Labelled uniform JSONL files");
  se->add_option("--sigmas", ev.sigmas, "Spread widths")->delimiter(',');
  se->add_option("--spread-n", ev.spreadPoints)->capture_default_str();
  se->add_option("--level", ev.level, "NPA level of the spread boundary")->capture_default_str();
  se->add_option("--slices", ev.slices, "slice1, slice2, full8")->delimiter(',');
  se->add_option("--resolution", ev.resolution)->capture_default_str();
  se->add_option("--truth", ev.truth, "Oracle used as slice ground truth");
  se->add_flag("--composite", ev.composite, "Relabel full8 points to the canonical facet first");
  se->add_option("--out", ev.out, "Report JSON");

  SliceArgs sl;
  auto* ss = app.add_subcommand("slice", "Classify a 2D slice grid");
  ss->add_option("--model", sl.model);
  ss->add_option("--oracle", sl.oracle);
  ss->add_option("--slice", sl.slice, "slice1, slice2 or full8")->capture_default_str();
  ss->add_option("--resolution", sl.resolution)->capture_default_str();
  ss->add_flag("--composite", sl.composite);
  ss->add_option("--out", sl.out, "CSV u,v,label")->required();

  VolumeArgs vo;
  auto* sv = app.add_subcommand("volume", "Monte Carlo volume ratios");
  sv->add_option("--space", vo.space)->capture_default_str();
  sv->add_option("--region", vo.region, "uniform or simplex")->capture_default_str();
  sv->add_option("--oracle", vo.oracles, "One or more oracles")->capture_default_str();
  sv->add_option("--n", vo.n)->capture_default_str();
  sv->add_option("--out", vo.out, "CSV level,ratio,stderr,tPerPoint");

  AppendixArgs ap;
  auto* sa = app.add_subcommand("appendixa", "Boundary of Q_1+AB against the steered see-saw");
  sa->add_option("--n", ap.n, "Facet-filtered directions")->capture_default_str();
  sa->add_option("--d", ap.d, "Local dimension")->capture_default_str();
  sa->add_option("--seeds", ap.seeds)->capture_default_str();
  sa->add_option("--max-sweeps", ap.maxSweeps)->capture_default_str();
  sa->add_option("--threshold", ap.threshold)->capture_default_str();
  sa->add_option("--histogram", ap.histogram, "Distance histogram CSV");
  sa->add_option("--points", ap.points, "Per-direction CSV");
  sa->add_option("--summary", ap.summary, "Summary JSON");

  RoundsArgs ro;
  auto* sr = app.add_subcommand("rounds", "Round protocol of increasing local dimension");
  sr->add_option("--in", ro.in, "Behaviours JSONL")->required();
  sr->add_option("--out", ro.out, "Round CSV")->required();
  sr->add_option("--points", ro.points, "Per-point CSV");
  sr->add_option("--schedule", ro.schedule, "Rounds as <d>:<seeds>")->delimiter(',')->capture_default_str();
  sr->add_option("--max-sweeps", ro.maxSweeps)->capture_default_str();
  sr->add_option("--threshold", ro.threshold)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Domain);
  }

  try {
    if (*sg) cmd_generate(gen, g);
    else if (*sc) cmd_classify(cls, g);
    else if (*st) cmd_train(tr, g);
    else if (*se) cmd_eval(ev, g);
    else if (*ss) cmd_slice(sl, g);
    else if (*sv) cmd_volume(vo, g);
    else if (*sa) cmd_appendixa(ap, g);
    else if (*sr) cmd_rounds(ro, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Domain);
  }
  return 0;
}

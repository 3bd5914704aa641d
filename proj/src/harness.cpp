#include "vibgsl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "vibgsl/errors.hpp"
#include "vibgsl/ops.hpp"
#include "vibgsl/optim.hpp"

namespace vibgsl {

std::uint64_t split_seed(const TrainConfig& config) { return mix_seed(config.seed, 1); }
std::uint64_t fold_model_seed(const TrainConfig& config, std::size_t fold) {
  return mix_seed(mix_seed(config.seed, 2), fold);
}
std::uint64_t eval_seed(const TrainConfig& config) { return mix_seed(config.seed, 3); }
std::uint64_t perturbation_seed(const TrainConfig& config, PerturbMode mode, std::size_t ratio_index) {
  return mix_seed(mix_seed(config.seed, mode == PerturbMode::remove ? 4 : 5), ratio_index);
}

double evaluate(Model& model, const GraphDataset& ds, const std::vector<std::size_t>& idx, std::uint64_t seed) {
  if (idx.empty()) throw ParameterError("evaluate: empty index set");
  std::size_t correct = 0;
  for (std::size_t i : idx) {
    const Graph& g = ds.graphs.at(i);
    if (predict(model, g, mix_seed(seed, i)) == g.label.value_or(-1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

TrainRun train_model(const GraphDataset& ds, const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& eval_idx, const TrainConfig& config, std::uint64_t model_seed) {
  config.validate();
  if (train_idx.empty()) throw ParameterError("train: empty training set");
  for (std::size_t i : train_idx) {
    if (i >= ds.graphs.size() || !ds.graphs[i].label) throw ParameterError("train: every graph needs a label");
  }

  TrainRun run{Model::init(config, ds.feature_dim, ds.num_classes, model_seed), {}, {}};
  Model& model = run.model;
  const auto params = model.parameters();
  for (Tensor* p : params) {
    if (!p->requires_grad()) p->set_requires_grad(true);
  }
  AdamState state;
  const AdamOptions adam{config.lr};
  std::mt19937_64 rng(mix_seed(model_seed, 1));
  const std::uint64_t scoring_seed = eval_seed(config);

  std::vector<std::size_t> order = train_idx;
  std::vector<LossBreakdown> items;
  items.reserve(order.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    items.clear();
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      zero_grads(params);
      for (std::size_t i = begin; i < end; ++i) {
        const Graph& g = ds.graphs[order[i]];
        Tape tape;
        const auto noise = draw_forward_noise(model, g.num_nodes(), rng);
        const auto vars = forward(tape, model, g, noise, config.beta, true);
        const auto loss = breakdown(tape, vars.loss, config.beta);
        if (!std::isfinite(loss.total)) {
          throw NonFiniteError("non-finite loss at epoch " + std::to_string(epoch) + ", graph " +
                               std::to_string(order[i]) + "; first non-finite tensor: " +
                               tape.first_non_finite().value_or("none"));
        }
        items.push_back(loss);
        if (argmax(tape.value(vars.logits).data()) == *g.label) ++correct;
        const std::size_t batch = end - begin;
        tape.backward(batch == 1 ? vars.loss.total : scale(tape, vars.loss.total, 1.0 / static_cast<double>(batch)));
      }
      adam_step(params, state, adam);
    }

    const auto mean = batch_mean(items);
    EpochLog log{epoch, mean.total, mean.ce, mean.kl,
                 static_cast<double>(correct) / static_cast<double>(order.size()), std::nullopt};
    if (!eval_idx.empty()) log.eval_accuracy = evaluate(model, ds, eval_idx, scoring_seed);
    run.epochs.push_back(log);
    run.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  return run;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold, std::size_t dataset_size) const {
  const auto& held = test.at(fold);
  std::vector<std::size_t> out;
  out.reserve(dataset_size - held.size());
  for (std::size_t i = 0; i < dataset_size; ++i) {
    if (!std::binary_search(held.begin(), held.end(), i)) out.push_back(i);
  }
  return out;
}

FoldSplit make_folds(const GraphDataset& ds, std::size_t k, std::uint64_t seed) {
  const std::size_t n = ds.graphs.size();
  if (k < 2) throw ParameterError("need at least 2 folds");
  if (k > n) throw ParameterError("folds (" + std::to_string(k) + ") exceed dataset size (" + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[ds.graphs[i].label.value_or(-1)].push_back(i);

  FoldSplit split;
  split.test.resize(k);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [label, members] : by_class) {
    if (members.size() < k) {
      split.stratified = false;
      split.warning = "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                      " graphs, fewer than " + std::to_string(k) + " folds; using an unstratified split";
    }
  }
  if (split.stratified) {
    for (auto& [label, members] : by_class) groups.push_back(members);
  } else {
    groups.emplace_back(n);
    std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
  }
  std::size_t next = 0;
  for (auto& members : groups) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) split.test[next++ % k].push_back(i);
  }
  for (auto& fold : split.test) std::sort(fold.begin(), fold.end());
  return split;
}

void ExperimentReport::summarize() {
  if (folds.empty()) {
    mean_accuracy = std_accuracy = 0.0;
    return;
  }
  double total = 0.0;
  for (const auto& f : folds) total += f.accuracy;
  mean_accuracy = total / static_cast<double>(folds.size());
  double sq = 0.0;
  for (const auto& f : folds) sq += (f.accuracy - mean_accuracy) * (f.accuracy - mean_accuracy);
  std_accuracy = folds.size() > 1 ? std::sqrt(sq / static_cast<double>(folds.size() - 1)) : 0.0;
}

namespace {

ExperimentReport run_folds(const GraphDataset& ds, const TrainConfig& config, const FoldSplit& split,
                           std::string experiment) {
  ExperimentReport report;
  report.experiment = std::move(experiment);
  report.config = config;
  report.dataset = ds.name;
  if (split.warning) report.warnings.push_back(*split.warning);
  for (std::size_t f = 0; f < split.test.size(); ++f) {
    const auto train_idx = split.train_indices(f, ds.graphs.size());
    const std::uint64_t seed = fold_model_seed(config, f);
    auto run = train_model(ds, train_idx, split.test[f], config, seed);
    const auto& last = run.epochs.back();
    report.folds.push_back(FoldResult{f, seed, train_idx.size(), split.test[f].size(), *last.eval_accuracy,
                                      LossBreakdown{last.total, last.ce, last.kl, config.beta}});
    report.epoch_logs.push_back(std::move(run.epochs));
    report.epoch_seconds.push_back(std::move(run.epoch_seconds));
  }
  report.summarize();
  return report;
}

}  // namespace

ExperimentReport train(const GraphDataset& ds, const TrainConfig& config, Model* trained) {
  ds.validate();
  std::vector<std::size_t> all(ds.graphs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::uint64_t seed = fold_model_seed(config, 0);
  auto run = train_model(ds, all, all, config, seed);
  ExperimentReport report;
  report.experiment = "train";
  report.config = config;
  report.dataset = ds.name;
  const auto& last = run.epochs.back();
  report.folds.push_back(FoldResult{0, seed, all.size(), all.size(), *last.eval_accuracy,
                                    LossBreakdown{last.total, last.ce, last.kl, config.beta}});
  report.epoch_logs.push_back(std::move(run.epochs));
  report.epoch_seconds.push_back(std::move(run.epoch_seconds));
  report.summarize();
  if (trained != nullptr) *trained = std::move(run.model);
  return report;
}

ExperimentReport cross_validate(const GraphDataset& ds, const TrainConfig& config) {
  ds.validate();
  config.validate();
  return run_folds(ds, config, make_folds(ds, config.folds, split_seed(config)), "cv");
}

std::vector<double> default_beta_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

std::vector<ExperimentReport> beta_sweep(const GraphDataset& ds, const TrainConfig& config,
                                         const std::vector<double>& betas) {
  if (betas.empty()) throw ParameterError("beta sweep needs at least one beta");
  ds.validate();
  const auto split = make_folds(ds, config.folds, split_seed(config));
  std::vector<ExperimentReport> out;
  for (double beta : betas) {
    TrainConfig c = config;
    c.beta = beta;
    c.validate();
    out.push_back(run_folds(ds, c, split, "sweep-beta"));
  }
  return out;
}

std::vector<ExperimentReport> denoise_experiment(const GraphDataset& ds, const TrainConfig& config,
                                                 const DenoiseOptions& options) {
  ds.validate();
  config.validate();
  if (config.runs < 2) throw ParameterError("denoise needs at least 2 runs");
  for (double r : options.ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("perturbation ratios must lie in [0, 1]");
  }
  std::vector<ModelKind> kinds{config.model};
  if (options.with_baseline && config.model != ModelKind::raw_gnn) kinds.push_back(ModelKind::raw_gnn);

  const auto split = make_folds(ds, config.runs, split_seed(config));
  std::vector<ExperimentReport> cells;
  for (PerturbMode mode : options.modes) {
    for (std::size_t ri = 0; ri < options.ratios.size(); ++ri) {
      const double ratio = options.ratios[ri];
      auto perturbed = perturb_dataset(ds, {ratio, mode, perturbation_seed(config, mode, ri)});
      for (ModelKind kind : kinds) {
        TrainConfig c = config;
        c.model = kind;
        auto report = run_folds(perturbed, c, split, "denoise");
        report.perturb_mode = mode;
        report.perturb_ratio = ratio;
        cells.push_back(std::move(report));
      }
    }
  }
  return cells;
}

double accuracy_spread(const std::vector<ExperimentReport>& cells, ModelKind model, PerturbMode mode) {
  double lo = 1.0, hi = 0.0;
  bool any = false;
  for (const auto& c : cells) {
    if (c.config.model != model || c.perturb_mode != mode) continue;
    lo = std::min(lo, c.mean_accuracy);
    hi = std::max(hi, c.mean_accuracy);
    any = true;
  }
  if (!any) throw ParameterError("no denoising cells for " + to_string(model) + "/" + to_string(mode));
  return hi - lo;
}

TimingReport timing_probe(const TrainConfig& config, const std::vector<std::size_t>& sizes, std::size_t feature_dim,
                          std::size_t repeats) {
  config.validate();
  if (sizes.empty()) throw ParameterError("timing probe needs at least one size");
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ParameterError("timing sizes must be ascending");
  if (repeats == 0) throw ParameterError("timing repeats must be positive");
  constexpr std::size_t kBlocks = 7;
  constexpr double kMinBlockSeconds = 0.05;
  TimingReport report;
  std::mt19937_64 rng(mix_seed(config.seed, 6));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t n : sizes) {
    if (n == 0) throw ParameterError("timing sizes must be positive");
    Graph g{Tensor::matrix(n, feature_dim), Tensor::matrix(n, n), 0};
    for (double& x : g.features.data()) x = normal(rng);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (unit(rng) < 0.2) g.adjacency(u, v) = g.adjacency(v, u) = 1.0;
      }
    }
    Model model = Model::init(config, feature_dim, 2, mix_seed(config.seed, n));
    const auto params = model.parameters();
    // Times forward + backward only.
    auto forward_backward = [&] {
      zero_grads(params);
      const auto noise = draw_forward_noise(model, n, rng);
      const auto t0 = std::chrono::steady_clock::now();
      Tape tape;
      const auto vars = forward(tape, model, g, noise, config.beta, true);
      tape.backward(vars.loss.total);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    for (Tensor* p : params) {
      if (!p->requires_grad()) p->set_requires_grad(true);
    }
    double warm = std::numeric_limits<double>::infinity();
    for (int w = 0; w < 3; ++w) warm = std::min(warm, forward_backward());
    const auto reps = std::max(repeats, static_cast<std::size_t>(std::ceil(kMinBlockSeconds / warm)));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < kBlocks; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < reps; ++r) s += forward_backward();
      best = std::min(best, s / static_cast<double>(reps));
    }
    report.points.push_back({n, best});
  }

  if (report.points.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : report.points) {
      mx += std::log(static_cast<double>(p.nodes));
      my += std::log(p.seconds);
    }
    const double m = static_cast<double>(report.points.size());
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : report.points) {
      const double dx = std::log(static_cast<double>(p.nodes)) - mx;
      sxy += dx * (std::log(p.seconds) - my);
      sxx += dx * dx;
    }
    report.exponent = sxx > 0.0 ? sxy / sxx : 0.0;
    report.coefficient = std::exp(my - report.exponent * mx);
  }
  return report;
}

namespace {

nlohmann::ordered_json loss_json(const LossBreakdown& l) {
  nlohmann::ordered_json j;
  j["total"] = l.total;
  j["ce"] = l.ce;
  j["kl"] = l.kl;
  return j;
}

}  // namespace

nlohmann::ordered_json report_json(const ExperimentReport& report) {
  const auto cfg = config_json(report.config);
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["dataset"] = report.dataset;
  j["config_hash"] = config_hash(cfg);
  j["config"] = cfg;
  if (report.perturb_mode) {
    j["perturbation"] = {{"mode", to_string(*report.perturb_mode)}, {"ratio", report.perturb_ratio.value_or(0.0)}};
  }
  j["mean_accuracy"] = report.mean_accuracy;
  j["std_accuracy"] = report.std_accuracy;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold;
    fj["seed"] = f.seed;
    fj["train_size"] = f.train_size;
    fj["test_size"] = f.test_size;
    fj["accuracy"] = f.accuracy;
    fj["final_loss"] = loss_json(f.final_loss);
    j["folds"].push_back(fj);
  }
  j["warnings"] = report.warnings;
  j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& fold : report.epoch_logs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : fold) {
      nlohmann::ordered_json ej;
      ej["epoch"] = e.epoch;
      ej["total"] = e.total;
      ej["ce"] = e.ce;
      ej["kl"] = e.kl;
      ej["train_accuracy"] = e.train_accuracy;
      ej["eval_accuracy"] = e.eval_accuracy ? nlohmann::ordered_json(*e.eval_accuracy) : nlohmann::ordered_json();
      arr.push_back(ej);
    }
    j["epochs"].push_back(arr);
  }
  return j;
}

nlohmann::ordered_json reports_json(const std::vector<ExperimentReport>& reports) {
  nlohmann::ordered_json j;
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) j["reports"].push_back(report_json(r));
  return j;
}

nlohmann::ordered_json timing_json(const std::vector<ExperimentReport>& reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back({{"experiment", r.experiment}, {"epoch_seconds", r.epoch_seconds}});
  return {{"wallclock", arr}};
}

nlohmann::ordered_json timing_json(const TimingReport& report) {
  nlohmann::ordered_json j;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : report.points) j["points"].push_back({{"nodes", p.nodes}, {"seconds", p.seconds}});
  j["coefficient"] = report.coefficient;
  j["exponent"] = report.exponent;
  return j;
}

void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << "experiment,config_hash,model,beta,mode,ratio,fold,seed,accuracy,total,ce,kl\n";
  out << std::setprecision(10);
  for (const auto& r : reports) {
    const std::string hash = config_hash(config_json(r.config));
    const std::string mode = r.perturb_mode ? to_string(*r.perturb_mode) : "";
    for (const auto& f : r.folds) {
      out << r.experiment << ',' << hash << ',' << to_string(r.config.model) << ',' << r.config.beta << ',' << mode
          << ',';
      if (r.perturb_ratio) out << *r.perturb_ratio;
      out << ',' << f.fold << ',' << f.seed << ',' << f.accuracy << ',' << f.final_loss.total << ','
          << f.final_loss.ce << ',' << f.final_loss.kl << '\n';
    }
  }
}

void write_epochs_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << "report,model,beta,mode,ratio,fold,epoch,total,ce,kl,train_accuracy,eval_accuracy\n";
  out << std::setprecision(10);
  for (std::size_t ri = 0; ri < reports.size(); ++ri) {
    const auto& r = reports[ri];
    const std::string mode = r.perturb_mode ? to_string(*r.perturb_mode) : "";
    for (std::size_t f = 0; f < r.epoch_logs.size(); ++f) {
      for (const auto& e : r.epoch_logs[f]) {
        out << ri << ',' << to_string(r.config.model) << ',' << r.config.beta << ',' << mode << ',';
        if (r.perturb_ratio) out << *r.perturb_ratio;
        out << ',' << f << ',' << e.epoch << ',' << e.total << ',' << e.ce << ',' << e.kl << ','
            << e.train_accuracy << ',';
        if (e.eval_accuracy) out << *e.eval_accuracy;
        out << '\n';
      }
    }
  }
}

}  // namespace vibgsl

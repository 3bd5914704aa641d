// Command-line driver: dataset synthesis, training, cross-validation, beta
// sweeps, denoising runs, bound verification, gradient checks and timing.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vibgsl/config.hpp"
#include "vibgsl/errors.hpp"
#include "vibgsl/gradcheck.hpp"
#include "vibgsl/graph.hpp"
#include "vibgsl/harness.hpp"
#include "vibgsl/info.hpp"
#include "vibgsl/model.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace vibgsl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitViolation = 2;

// Training flags are bound to private storage and applied on top of an
// optional --config file, so explicit flags always win.
class TrainFlags {
 public:
  explicit TrainFlags(CLI::App* app) : app_(app) {
    app->add_option("--config", config_path_, "JSON config snapshot to start from")->check(CLI::ExistingFile);
    parsed("--model", &TrainConfig::model, parse_model_kind, "vib_gsl | raw_gnn", "vib_gsl");
    parsed("--backbone", &TrainConfig::backbone, parse_backbone, "gcn | gin", "gcn");
    plain("--epochs", &TrainConfig::epochs, "training epochs E");
    plain("--lr", &TrainConfig::lr, "Adam learning rate");
    plain("--beta", &TrainConfig::beta, "KL weight beta");
    plain("--bottleneck-k", &TrainConfig::bottleneck, "bottleneck size K");
    plain("--temperature", &TrainConfig::temperature, "concrete temperature t");
    plain("--threshold-a0", &TrainConfig::threshold, "sparsification threshold a0");
    plain("--mask-temperature", &TrainConfig::mask_temperature, "feature-mask temperature");
    plain("--hidden", &TrainConfig::hidden, "encoder hidden width");
    plain("--layers", &TrainConfig::layers, "encoder layers");
    plain("--classifier-hidden", &TrainConfig::classifier_hidden, "classifier hidden width");
    plain("--structure-hidden", &TrainConfig::structure_hidden, "structure learner hidden width");
    plain("--structure-embed", &TrainConfig::structure_embed, "structure learner embedding width");
    plain("--gin-eps", &TrainConfig::gin_eps, "GIN epsilon");
    plain("--batch-size", &TrainConfig::batch_size, "graphs per optimizer step");
    plain("--folds", &TrainConfig::folds, "cross-validation folds");
    plain("--runs", &TrainConfig::runs, "runs per denoising cell");
    plain("--seed", &TrainConfig::seed, "master seed");
    parsed("--eval-adjacency", &TrainConfig::eval_adjacency, parse_eval_adjacency, "expected | hard", "expected");
  }

  [[nodiscard]] TrainConfig resolve() const {
    TrainConfig c;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      auto j = nlohmann::json::parse(in);
      c = config_from_json(j.contains("train") ? j.at("train") : j);
    }
    for (const auto& [opt, apply] : setters_) {
      if (opt->count() > 0) apply(c);
    }
    c.validate();
    return c;
  }

 private:
  template <class T>
  void plain(const std::string& name, T TrainConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>(TrainConfig{}.*field);
    auto* opt = app_->add_option(name, *value, help)->capture_default_str();
    setters_.emplace_back(opt, [value, field](TrainConfig& c) { c.*field = *value; });
  }

  template <class T, class Parse>
  void parsed(const std::string& name, T TrainConfig::*field, Parse parse, const std::string& help,
              const std::string& fallback) {
    auto value = std::make_shared<std::string>(fallback);
    auto* opt = app_->add_option(name, *value, help)->capture_default_str();
    setters_.emplace_back(opt, [value, field, parse](TrainConfig& c) { c.*field = parse(*value); });
  }

  CLI::App* app_;
  std::string config_path_;
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> setters_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ParameterError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParameterError("empty list");
  return out;
}

std::vector<PerturbMode> parse_modes(const std::string& text) {
  std::vector<PerturbMode> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_perturb_mode(item));
  }
  if (out.empty()) throw ParameterError("empty mode list");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

// Creates <out>/<hash>/ and writes config.json before any computation.
fs::path open_run_dir(const std::string& out_root, const ordered_json& resolved) {
  const fs::path dir = fs::path(out_root) / config_hash(resolved);
  fs::create_directories(dir);
  write_text(dir / "config.json", resolved.dump(2) + "\n");
  std::cerr << "run directory: " << dir.string() << "\n";
  return dir;
}

void write_reports(const fs::path& dir, const std::vector<ExperimentReport>& reports, const ordered_json& body) {
  write_text(dir / "report.json", body.dump(2) + "\n");
  std::ostringstream csv, epochs;
  write_report_csv(csv, reports);
  write_epochs_csv(epochs, reports);
  write_text(dir / "report.csv", csv.str());
  write_text(dir / "epochs.csv", epochs.str());
  write_text(dir / "wallclock.json", timing_json(reports).dump(2) + "\n");
  for (const auto& r : reports) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  }
}

void print_summary(const ExperimentReport& r) {
  std::cout << r.experiment << " model=" << to_string(r.config.model) << " beta=" << r.config.beta;
  if (r.perturb_mode) std::cout << " mode=" << to_string(*r.perturb_mode) << " ratio=" << *r.perturb_ratio;
  std::cout << " accuracy=" << r.mean_accuracy << " +/- " << r.std_accuracy << "\n";
}

void export_graphs(const fs::path& dir, Model& model, const GraphDataset& ds, const std::vector<std::size_t>& indices,
                   std::uint64_t seed) {
  fs::create_directories(dir / "graphs");
  std::ofstream lines(dir / "graphs" / "ib_graphs.jsonl", std::ios::binary);
  for (std::size_t i : indices) {
    if (i >= ds.graphs.size()) throw ParameterError("graph index " + std::to_string(i) + " out of range");
    const Graph& g = ds.graphs[i];
    const auto ib = export_ib_graph(model, g, mix_seed(seed, i)).as_graph();
    std::ofstream original(dir / "graphs" / ("graph_" + std::to_string(i) + "_input.dot"), std::ios::binary);
    write_dot(original, g, "input_" + std::to_string(i));
    std::ofstream learned(dir / "graphs" / ("graph_" + std::to_string(i) + "_ib.dot"), std::ios::binary);
    write_dot(learned, ib, "ib_" + std::to_string(i));
    write_graph_line(lines, ib, true);
  }
}

ordered_json bound_report_json(const info::BoundSuiteReport& r) {
  ordered_json j;
  j["instances"] = r.instances;
  j["failures"] = r.failures;
  j["max_violation"] = r.max_violation;
  j["checks"] = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["instances"] = c.instances;
    cj["failures"] = c.failures;
    cj["max_violation"] = c.max_violation;
    if (c.max_tight_gap >= 0.0) cj["max_tight_gap"] = c.max_tight_gap;
    j["checks"].push_back(cj);
  }
  return j;
}

ordered_json gradcheck_json(const std::vector<GradcheckResult>& results) {
  auto arr = ordered_json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name}, {"entries", r.entries}, {"failures", r.failures}, {"max_error", r.max_error}});
  }
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph structure learning with a variational information bottleneck"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string dataset_path;
  std::string out_root = "runs";

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic two-class dataset");
  SynthSpec synth_spec;
  std::string synth_out;
  synth->add_option("--output,-o", synth_out, "JSON-lines output file")->required();
  synth->add_option("--graphs", synth_spec.num_graphs, "number of graphs")->capture_default_str();
  synth->add_option("--nodes", synth_spec.nodes_per_graph, "nodes per graph")->capture_default_str();
  synth->add_option("--features", synth_spec.feature_dim, "feature dimensions")->capture_default_str();
  synth->add_option("--signal-dims", synth_spec.signal_dims, "label-carrying feature dims")->capture_default_str();
  synth->add_option("--noise-edges", synth_spec.noise_edges_ratio, "added noise edges / clean edges")
      ->capture_default_str();
  synth->add_option("--separation", synth_spec.separation, "class mean gap on signal dims")->capture_default_str();
  synth->add_option("--node-noise", synth_spec.node_noise, "per-node feature noise std")->capture_default_str();
  synth->add_option("--nuisance-hubs", synth_spec.nuisance_hubs, "label-free high-variance nodes per graph")
      ->capture_default_str();
  synth->add_option("--hub-noise", synth_spec.hub_noise, "feature std of nuisance hubs")->capture_default_str();
  synth->add_option("--intra-density", synth_spec.intra_density, "edge density inside a community")
      ->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "generator seed")->capture_default_str();

  auto add_run = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--dataset", dataset_path, "JSON-lines dataset")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_root, "output root")->capture_default_str();
    return sub;
  };

  auto* train_cmd = add_run("train", "train on the whole dataset");
  TrainFlags train_flags(train_cmd);
  std::size_t export_count = 5;
  train_cmd->add_option("--export-count", export_count, "IB-Graphs to export as DOT")->capture_default_str();

  auto* cv_cmd = add_run("cv", "k-fold cross-validation");
  TrainFlags cv_flags(cv_cmd);

  auto* sweep_cmd = add_run("sweep-beta", "cross-validation per beta");
  TrainFlags sweep_flags(sweep_cmd);
  std::string betas_text = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  sweep_cmd->add_option("--betas", betas_text, "comma-separated beta grid")->capture_default_str();

  auto* denoise_cmd = add_run("denoise", "edge-perturbation robustness");
  TrainFlags denoise_flags(denoise_cmd);
  std::string ratios_text = "0.25,0.5,0.75";
  std::string modes_text = "remove,add";
  bool no_baseline = false;
  denoise_cmd->add_option("--ratios", ratios_text, "comma-separated perturbation ratios")->capture_default_str();
  denoise_cmd->add_option("--modes", modes_text, "remove,add")->capture_default_str();
  denoise_cmd->add_flag("--no-baseline", no_baseline, "skip the raw-graph baseline");

  auto* export_cmd = add_run("export-graph", "train, then export learned IB-Graphs");
  TrainFlags export_flags(export_cmd);
  std::string export_indices = "0";
  export_cmd->add_option("--graphs", export_indices, "comma-separated graph indices")->capture_default_str();

  auto* timing_cmd = app.add_subcommand("timing", "time training steps against graph size");
  TrainFlags timing_flags(timing_cmd);
  std::string sizes_text = "16,32,64,128";
  std::size_t timing_repeats = 20;
  timing_cmd->add_option("--sizes", sizes_text, "comma-separated node counts")->capture_default_str();
  timing_cmd->add_option("--repeats", timing_repeats, "steps per timing block")->capture_default_str();
  timing_cmd->add_option("--out", out_root, "output root")->capture_default_str();

  auto* bounds_cmd = app.add_subcommand("verify-bounds", "randomised check of the information bounds");
  std::size_t instances = 1000;
  std::uint64_t bounds_seed = 0;
  std::size_t max_alphabet = 4;
  bounds_cmd->add_option("--instances", instances, "random Markov-chain instances")->capture_default_str();
  bounds_cmd->add_option("--seed", bounds_seed, "instance seed")->capture_default_str();
  bounds_cmd->add_option("--max-alphabet", max_alphabet, "largest alphabet (2..6)")->capture_default_str();
  bounds_cmd->add_option("--out", out_root, "output root")->capture_default_str();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  std::uint64_t grad_seed = 0;
  GradcheckOptions grad_options;
  grad_options.tolerance = 1e-3;
  grad_cmd->add_option("--seed", grad_seed, "input seed")->capture_default_str();
  grad_cmd->add_option("--tolerance", grad_options.tolerance, "max relative error")->capture_default_str();
  grad_cmd->add_option("--step", grad_options.step, "central-difference step")->capture_default_str();
  grad_cmd->add_option("--out", out_root, "output root")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInvalid;
  }

  try {
    if (synth->parsed()) {
      const auto ds = synth_two_class(synth_spec);
      save_dataset(ds, synth_out);
      std::cout << ordered_json{{"command", "synth"}, {"output", synth_out}, {"graphs", ds.graphs.size()},
                                {"seed", synth_spec.seed}}
                       .dump()
                << "\n";
      return kExitOk;
    }

    if (bounds_cmd->parsed()) {
      ordered_json resolved{{"command", "verify-bounds"},
                            {"instances", instances},
                            {"seed", bounds_seed},
                            {"max_alphabet", max_alphabet}};
      const auto dir = open_run_dir(out_root, resolved);
      const auto report = info::verify_bounds(instances, bounds_seed, max_alphabet);
      const auto j = bound_report_json(report);
      write_text(dir / "report.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return report.failures == 0 ? kExitOk : kExitViolation;
    }

    if (grad_cmd->parsed()) {
      ordered_json resolved{{"command", "gradcheck"},
                            {"seed", grad_seed},
                            {"tolerance", grad_options.tolerance},
                            {"step", grad_options.step}};
      const auto dir = open_run_dir(out_root, resolved);
      auto results = check_primitive_ops(grad_seed, grad_options);
      for (auto& r : check_model_gradients(grad_seed, grad_options)) results.push_back(std::move(r));
      bool ok = true;
      for (const auto& r : results) {
        std::cout << (r.passed() ? "ok   " : "FAIL ") << r.name << " entries=" << r.entries
                  << " max_error=" << r.max_error << "\n";
        ok = ok && r.passed();
      }
      write_text(dir / "report.json", ordered_json{{"checks", gradcheck_json(results)}, {"passed", ok}}.dump(2) + "\n");
      return ok ? kExitOk : kExitViolation;
    }

    if (timing_cmd->parsed()) {
      const auto config = timing_flags.resolve();
      std::vector<std::size_t> sizes;
      for (double s : parse_list(sizes_text)) sizes.push_back(static_cast<std::size_t>(s));
      ordered_json resolved{{"command", "timing"}, {"train", config_json(config)}, {"sizes", sizes},
                            {"repeats", timing_repeats}};
      const auto dir = open_run_dir(out_root, resolved);
      const auto report = timing_probe(config, sizes, 8, timing_repeats);
      // Timings are not reproducible, so report.json carries only the setup.
      write_text(dir / "report.json", ordered_json{{"command", "timing"}, {"sizes", sizes}}.dump(2) + "\n");
      const auto tj = timing_json(report);
      write_text(dir / "wallclock.json", tj.dump(2) + "\n");
      std::cout << tj.dump(2) << "\n";
      return kExitOk;
    }

    const auto ds = load_dataset(dataset_path);

    if (train_cmd->parsed()) {
      const auto config = train_flags.resolve();
      ordered_json resolved{{"command", "train"}, {"dataset", dataset_path}, {"train", config_json(config)}};
      const auto dir = open_run_dir(out_root, resolved);
      Model model;
      const auto report = train(ds, config, &model);
      write_reports(dir, {report}, report_json(report));
      if (config.model == ModelKind::vib_gsl && export_count > 0) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < std::min(export_count, ds.graphs.size()); ++i) idx.push_back(i);
        export_graphs(dir, model, ds, idx, eval_seed(config));
      }
      print_summary(report);
      return kExitOk;
    }

    if (cv_cmd->parsed()) {
      const auto config = cv_flags.resolve();
      ordered_json resolved{{"command", "cv"}, {"dataset", dataset_path}, {"train", config_json(config)}};
      const auto dir = open_run_dir(out_root, resolved);
      const auto report = cross_validate(ds, config);
      write_reports(dir, {report}, report_json(report));
      print_summary(report);
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      const auto config = sweep_flags.resolve();
      const auto betas = parse_list(betas_text);
      ordered_json resolved{
          {"command", "sweep-beta"}, {"dataset", dataset_path}, {"train", config_json(config)}, {"betas", betas}};
      const auto dir = open_run_dir(out_root, resolved);
      const auto reports = beta_sweep(ds, config, betas);
      write_reports(dir, reports, reports_json(reports));
      for (const auto& r : reports) print_summary(r);
      return kExitOk;
    }

    if (denoise_cmd->parsed()) {
      const auto config = denoise_flags.resolve();
      DenoiseOptions options;
      options.ratios = parse_list(ratios_text);
      options.modes = parse_modes(modes_text);
      options.with_baseline = !no_baseline;
      std::vector<std::string> mode_names;
      for (auto m : options.modes) mode_names.push_back(to_string(m));
      ordered_json resolved{{"command", "denoise"},       {"dataset", dataset_path},
                            {"train", config_json(config)}, {"ratios", options.ratios},
                            {"modes", mode_names},          {"baseline", options.with_baseline}};
      const auto dir = open_run_dir(out_root, resolved);
      const auto cells = denoise_experiment(ds, config, options);
      write_reports(dir, cells, reports_json(cells));
      for (const auto& r : cells) print_summary(r);
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      const auto config = export_flags.resolve();
      if (config.model != ModelKind::vib_gsl) throw ParameterError("export-graph needs --model vib_gsl");
      std::vector<std::size_t> idx;
      for (double v : parse_list(export_indices)) idx.push_back(static_cast<std::size_t>(v));
      ordered_json resolved{
          {"command", "export-graph"}, {"dataset", dataset_path}, {"train", config_json(config)}, {"graphs", idx}};
      const auto dir = open_run_dir(out_root, resolved);
      Model model;
      const auto report = train(ds, config, &model);
      write_reports(dir, {report}, report_json(report));
      export_graphs(dir, model, ds, idx, eval_seed(config));
      print_summary(report);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  std::cerr << app.help();
  return kExitInvalid;
}

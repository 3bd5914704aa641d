#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "vibgsl/errors.hpp"
#include "vibgsl/harness.hpp"

using namespace vibgsl;

namespace {

GraphDataset tiny_dataset(std::size_t graphs = 12) {
  SynthSpec spec;
  spec.num_graphs = graphs;
  spec.nodes_per_graph = 6;
  spec.feature_dim = 4;
  spec.seed = 5;
  auto ds = synth_two_class(spec);
  ds.name = "tiny";
  return ds;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 3;
  c.hidden = 6;
  c.bottleneck = 3;
  c.classifier_hidden = 5;
  c.structure_hidden = 6;
  c.structure_embed = 4;
  c.folds = 3;
  c.runs = 2;
  c.lr = 1e-2;
  return c;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("json round-trip and unknown keys") {
    TrainConfig c = quick_config();
    c.model = ModelKind::raw_gnn;
    c.backbone = Backbone::gin;
    c.beta = 0.25;
    const auto back = config_from_json(config_json(c));
    CHECK(config_json(back) == config_json(c));
    CHECK(config_hash(config_json(back)) == config_hash(config_json(c)));
    c.seed = 1;
    CHECK(config_hash(config_json(back)) != config_hash(config_json(c)));
    auto j = config_json(c);
    j["bogus"] = 1;
    CHECK_THROWS_AS((void)config_from_json(j), ParameterError);
  }

  TEST_CASE("validation rejects out-of-range values") {
    TrainConfig c;
    c.beta = -1.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.temperature = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.bottleneck = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
  }
}

TEST_SUITE("folds") {
  TEST_CASE("two folds on four graphs partition the dataset") {
    const auto ds = tiny_dataset(4);
    const auto split = make_folds(ds, 2, 0);
    REQUIRE(split.test.size() == 2);
    std::set<std::size_t> seen;
    for (std::size_t f = 0; f < 2; ++f) {
      CHECK(split.test[f].size() == 2);
      for (std::size_t i : split.test[f]) CHECK(seen.insert(i).second);
      const auto train = split.train_indices(f, 4);
      CHECK(train.size() == 2);
      for (std::size_t i : train)
        CHECK(std::find(split.test[f].begin(), split.test[f].end(), i) == split.test[f].end());
    }
    CHECK(seen.size() == 4);
    CHECK(split.stratified);
  }

  TEST_CASE("stratification balances classes and falls back with a warning") {
    const auto ds = tiny_dataset(12);
    const auto split = make_folds(ds, 3, 7);
    for (const auto& fold : split.test) {
      int ones = 0;
      for (std::size_t i : fold) ones += *ds.graphs[i].label;
      CHECK(ones == 2);
    }
    const auto loose = make_folds(ds, 12, 7);
    CHECK_FALSE(loose.stratified);
    CHECK(loose.warning.has_value());
    CHECK_THROWS_AS((void)make_folds(ds, 1, 0), ParameterError);
    CHECK_THROWS_AS((void)make_folds(ds, 13, 0), ParameterError);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("cv mean is the mean of fold accuracies") {
    const auto ds = tiny_dataset();
    const auto r = cross_validate(ds, quick_config());
    REQUIRE(r.folds.size() == 3);
    double total = 0.0;
    for (const auto& f : r.folds) total += f.accuracy;
    CHECK(std::abs(total / 3.0 - r.mean_accuracy) < 1e-12);
    CHECK(r.epoch_logs.size() == 3);
    CHECK(r.epoch_logs[0].size() == 3);
  }

  TEST_CASE("repeat runs are identical and reports serialise deterministically") {
    const auto ds = tiny_dataset();
    const auto a = cross_validate(ds, quick_config());
    const auto b = cross_validate(ds, quick_config());
    CHECK(report_json(a).dump() == report_json(b).dump());
    std::ostringstream ca, cb;
    write_epochs_csv(ca, {a});
    write_epochs_csv(cb, {b});
    CHECK(ca.str() == cb.str());
  }

  TEST_CASE("single-beta sweep equals cross validation") {
    const auto ds = tiny_dataset();
    auto c = quick_config();
    const auto cv = cross_validate(ds, c);
    const auto sweep = beta_sweep(ds, c, {c.beta});
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].mean_accuracy == cv.mean_accuracy);
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
      CHECK(sweep[0].folds[f].accuracy == cv.folds[f].accuracy);
      CHECK(sweep[0].folds[f].final_loss.total == cv.folds[f].final_loss.total);
    }
    CHECK_THROWS_AS((void)beta_sweep(ds, c, {}), ParameterError);
  }

  TEST_CASE("ratio-zero denoise cell equals the clean run") {
    const auto ds = tiny_dataset();
    auto c = quick_config();
    DenoiseOptions opts;
    opts.ratios = {0.0};
    opts.modes = {PerturbMode::remove};
    const auto cells = denoise_experiment(ds, c, opts);
    REQUIRE(cells.size() == 2);
    auto clean = c;
    clean.folds = c.runs;
    for (const auto& cell : cells) {
      auto cc = clean;
      cc.model = cell.config.model;
      const auto ref = cross_validate(ds, cc);
      CHECK(cell.mean_accuracy == ref.mean_accuracy);
      CHECK(cell.perturb_ratio == 0.0);
    }
    CHECK(accuracy_spread(cells, ModelKind::vib_gsl, PerturbMode::remove) == 0.0);
  }

  TEST_CASE("train reports training-set accuracy") {
    const auto ds = tiny_dataset();
    Model m;
    const auto r = train(ds, quick_config(), &m);
    CHECK(r.folds.size() == 1);
    CHECK(r.folds[0].train_size == ds.size());
    CHECK(m.parameters().size() > 0);
  }
}

TEST_SUITE("timing") {
  TEST_CASE("single-node probe does not error") {
    auto c = quick_config();
    const auto r = timing_probe(c, {1}, 4, 2);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].seconds > 0.0);
  }

  TEST_CASE("fit recovers the sizes") {
    auto c = quick_config();
    const auto r = timing_probe(c, {4, 8}, 4, 2);
    CHECK(r.points.size() == 2);
    CHECK(std::isfinite(r.exponent));
    CHECK(r.coefficient > 0.0);
  }
}

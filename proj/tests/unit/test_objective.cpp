#include <cmath>
#include <random>

#include "doctest.h"
#include "vibgsl/errors.hpp"
#include "vibgsl/model.hpp"
#include "vibgsl/objective.hpp"
#include "vibgsl/ops.hpp"

using namespace vibgsl;

namespace {

GaussianVars constant_gaussian(Tape& tape, std::vector<double> mu, std::vector<double> sigma) {
  return {tape.constant(Tensor::row(std::move(mu))), tape.constant(Tensor::row(std::move(sigma)))};
}

}  // namespace

TEST_SUITE("kl") {
  TEST_CASE("standard normal has zero divergence") {
    Tape tape;
    CHECK(tape.value(kl_to_standard_normal(tape, constant_gaussian(tape, {0, 0, 0}, {1, 1, 1}))).item() == 0.0);
  }

  TEST_CASE("unit shift gives one half") {
    Tape tape;
    CHECK(tape.value(kl_to_standard_normal(tape, constant_gaussian(tape, {1.0}, {1.0}))).item() ==
          doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("non-negative and matches the scalar helper") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> s(0.05, 3.0);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> mu(4), sigma(4);
      for (auto& m : mu) m = n(rng);
      for (auto& x : sigma) x = s(rng);
      Tape tape;
      const double kl = tape.value(kl_to_standard_normal(tape, constant_gaussian(tape, mu, sigma))).item();
      CHECK(kl >= 0.0);
      CHECK(kl == doctest::Approx(kl_to_standard_normal(mu, sigma)).epsilon(1e-13));
    }
  }

  TEST_CASE("sigma must be positive") {
    Tape tape;
    CHECK_THROWS_AS((void)kl_to_standard_normal(tape, constant_gaussian(tape, {0.0}, {0.0})), ContractError);
  }
}

TEST_SUITE("cross_entropy") {
  TEST_CASE("uniform logits give ln C") {
    const std::vector<double> logits{0.0, 0.0, 0.0};
    CHECK(cross_entropy(logits, 1) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  }

  TEST_CASE("dominant true class gives about zero without overflow") {
    const std::vector<double> logits{0.0, 1000.0, 0.0};
    const double ce = cross_entropy(logits, 1);
    CHECK(std::isfinite(ce));
    CHECK(ce < 1e-12);
    CHECK(std::isfinite(cross_entropy(logits, 0)));
  }

  TEST_CASE("label out of range is rejected") {
    const std::vector<double> logits{0.0, 1.0};
    CHECK_THROWS_AS((void)cross_entropy(logits, 2), ParameterError);
    CHECK_THROWS_AS((void)cross_entropy(logits, -1), ParameterError);
  }

  TEST_CASE("gradient is softmax minus one-hot") {
    Tensor logits = Tensor::row({0.5, -1.0, 2.0});
    Tape tape;
    tape.backward(cross_entropy(tape, tape.parameter(logits), 2));
    const auto p = softmax(logits.data());
    for (std::size_t i = 0; i < 3; ++i) CHECK(logits.grad()[i] == doctest::Approx(p[i] - (i == 2 ? 1.0 : 0.0)));
  }
}

TEST_SUITE("reparameterize") {
  TEST_CASE("sample mean within 3 sigma / sqrt(n)") {
    constexpr int kDraws = 100000;
    const std::vector<double> mu{0.5, -1.0}, sigma{2.0, 0.3};
    std::mt19937_64 rng(2);
    std::vector<double> total(2, 0.0);
    for (int i = 0; i < kDraws; ++i) {
      Tape tape;
      const auto& z = tape.value(reparameterize(tape, constant_gaussian(tape, mu, sigma), draw_gaussian(2, rng)));
      total[0] += z[0];
      total[1] += z[1];
    }
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(std::abs(total[k] / kDraws - mu[k]) < 3.0 * sigma[k] / std::sqrt(static_cast<double>(kDraws)));
  }

  TEST_CASE("gradient of E|z|^2 approaches 2 mu") {
    constexpr int kDraws = 20000;
    Tensor mu = Tensor::row({0.7, -0.4});
    Tensor sigma = Tensor::row({0.5, 0.5});
    std::mt19937_64 rng(3);
    for (int i = 0; i < kDraws; ++i) {
      Tape tape;
      GaussianVars g{tape.parameter(mu), tape.parameter(sigma)};
      Var z = reparameterize(tape, g, draw_gaussian(2, rng));
      tape.backward(scale(tape, sum(tape, mul(tape, z, z)), 1.0 / kDraws));
    }
    // d/dmu E|z|^2 = 2 mu; Monte-Carlo error is about 2 sigma / sqrt(n) = 0.007.
    CHECK(mu.grad()[0] == doctest::Approx(1.4).epsilon(0.03));
    CHECK(mu.grad()[1] == doctest::Approx(-0.8).epsilon(0.05));
    // d/dsigma E|z|^2 = 2 sigma.
    CHECK(sigma.grad()[0] == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("noise width must match") {
    Tape tape;
    CHECK_THROWS_AS((void)reparameterize(tape, constant_gaussian(tape, {0, 0}, {1, 1}), Tensor::row({0.0})),
                    DimensionError);
  }
}

TEST_SUITE("vib_loss") {
  TEST_CASE("total equals ce plus beta kl") {
    std::mt19937_64 rng(5);
    ClassifierParams cls = ClassifierParams::init(3, 4, 2, rng);
    for (double beta : {0.0, 1e-3, 0.5, 10.0}) {
      Tape tape;
      auto g = constant_gaussian(tape, {0.3, -0.2, 1.0}, {0.9, 1.4, 0.2});
      Var logits = classify(tape, g.mu, cls);
      const auto loss = vib_loss(tape, g, logits, 1, beta);
      const auto b = breakdown(tape, loss, beta);
      CHECK(b.total == b.ce + beta * b.kl);
      CHECK(b.total - b.ce == doctest::Approx(beta * b.kl).epsilon(1e-12));
      if (beta == 0.0) CHECK(b.total == b.ce);
    }
    Tape tape;
    auto g = constant_gaussian(tape, {0.0}, {1.0});
    CHECK_THROWS_AS((void)vib_loss(tape, g, tape.constant(Tensor::row({0.0, 0.0})), 0, -1.0), ParameterError);
  }

  TEST_CASE("batch mean recomputes the total") {
    const std::vector<LossBreakdown> items{{1.5, 1.0, 5.0, 0.1}, {3.5, 3.0, 5.0, 0.1}};
    const auto m = batch_mean(items);
    CHECK(m.ce == 2.0);
    CHECK(m.kl == 5.0);
    CHECK(m.total == m.ce + 0.1 * m.kl);
  }
}

TEST_SUITE("model") {
  TEST_CASE("end-to-end gradients on a five-node graph") {
    GradcheckOptions opts;
    opts.tolerance = 1e-3;
    for (const auto& r : check_model_gradients(7, opts)) {
      INFO(r.name << " max_error=" << r.max_error);
      CHECK(r.passed());
    }
  }

  TEST_CASE("raw model ignores beta and vib model reads no adjacency") {
    TrainConfig c;
    c.bottleneck = 4;
    c.hidden = 8;
    Graph g = Graph::from_edges(Tensor::matrix(4, 3, 0.5), {{0, 1}, {1, 2}}, 1);
    g.features(2, 1) = -1.0;
    Graph rewired = Graph::from_edges(g.features, {{0, 3}, {2, 3}}, 1);

    Model vib = Model::init(c, 3, 2, 1);
    for (std::uint64_t s : {1u, 2u}) CHECK(predict(vib, g, s) == predict(vib, rewired, s));
    const auto a = export_ib_graph(vib, g, 4);
    const auto b = export_ib_graph(vib, rewired, 4);
    CHECK(a.adjacency == b.adjacency);

    c.model = ModelKind::raw_gnn;
    Model raw = Model::init(c, 3, 2, 1);
    std::mt19937_64 rng(0);
    const auto noise = draw_forward_noise(raw, 4, rng);
    Tape t1, t2;
    const double l1 = t1.value(forward(t1, raw, g, noise, 0.0, true).loss.total).item();
    const double l2 = t2.value(forward(t2, raw, g, noise, 5.0, true).loss.total).item();
    CHECK(l1 == l2);
    CHECK_THROWS_AS((void)export_ib_graph(raw, g, 0), ContractError);
  }

  TEST_CASE("forward needs a label and matching width") {
    TrainConfig c;
    Model m = Model::init(c, 3, 2, 0);
    std::mt19937_64 rng(0);
    const auto noise = draw_forward_noise(m, 2, rng);
    Graph unlabelled = Graph::from_edges(Tensor::matrix(2, 3), {{0, 1}});
    Tape tape;
    CHECK_THROWS_AS((void)forward(tape, m, unlabelled, noise, 0.1, true), ContractError);
    Graph wide = Graph::from_edges(Tensor::matrix(2, 4), {{0, 1}}, 0);
    CHECK_THROWS_AS((void)forward(tape, m, wide, noise, 0.1, true), DimensionError);
  }
}

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vibgsl/errors.hpp"
#include "vibgsl/generator.hpp"
#include "vibgsl/ops.hpp"

using namespace vibgsl;

namespace {

GeneratorParams small_generator(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GeneratorParams p;
  p.mask = FeatureMaskParams::init(d);
  p.structure = StructureLearnerParams::init(d, 6, 4, rng);
  return p;
}

Graph random_graph(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Tensor x = Tensor::matrix(n, d);
  for (double& v : x.data()) v = normal(rng);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
  return Graph::from_edges(std::move(x), edges, 0);
}

}  // namespace

TEST_SUITE("mask_features") {
  TEST_CASE("single dim with half mask interpolates") {
    FeatureMaskParams p = FeatureMaskParams::init(1);
    Tape tape;
    Var out = mask_features(tape, tape.constant(Tensor::from_rows({{2.0}})), tape.constant(Tensor::from_rows({{0.0}})),
                            p, true);
    CHECK(tape.value(out).item() == 1.0);
  }

  TEST_CASE("saturated masks select X or X_r") {
    FeatureMaskParams p = FeatureMaskParams::init(2);
    p.mask_logits = Tensor::row({50.0, -50.0});
    const Tensor x = Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    const Tensor xr = Tensor::from_rows({{-1.0, -2.0}, {-3.0, -4.0}});
    Tape tape;
    const auto& out = tape.value(mask_features(tape, tape.constant(x), tape.constant(xr), p, true));
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(1, 0) == doctest::Approx(3.0));
    CHECK(out(0, 1) == doctest::Approx(-2.0));
    CHECK(out(1, 1) == doctest::Approx(-4.0));
    Tape eval;
    const auto& hard = eval.value(mask_features(eval, eval.constant(x), eval.constant(xr), p, false));
    CHECK(hard == Tensor::from_rows({{1.0, -2.0}, {3.0, -4.0}}));
  }

  TEST_CASE("width mismatch throws") {
    FeatureMaskParams p = FeatureMaskParams::init(3);
    Tape tape;
    Var x = tape.constant(Tensor::matrix(2, 2));
    CHECK_THROWS_AS((void)mask_features(tape, x, x, p, true), DimensionError);
  }

  TEST_CASE("permute_rows keeps the row multiset") {
    const Tensor x = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const Tensor p = permute_rows(x, {2, 0, 1});
    CHECK(p == Tensor::from_rows({{5, 6}, {1, 2}, {3, 4}}));
  }
}

TEST_SUITE("edge_probabilities") {
  TEST_CASE("large embedding gives probability near one") {
    StructureLearnerParams p;
    p.w1 = Tensor::matrix(1, 1, 0.0);
    p.b1 = Tensor::row({1.0});
    p.w2 = Tensor::matrix(1, 1, 10.0);
    p.b2 = Tensor::row({0.0});
    Tape tape;
    const auto& pi = tape.value(edge_probabilities(tape, tape.constant(Tensor::matrix(2, 1, 0.3)), p));
    CHECK(pi(0, 1) > 1.0 - 1e-12);
    CHECK(pi(0, 0) == 0.0);
  }

  TEST_CASE("symmetric with zero diagonal and values in [0, 1]") {
    auto params = small_generator(5, 4);
    const Graph g = random_graph(7, 5, 8);
    Tape tape;
    const auto& pi = tape.value(edge_probabilities(tape, tape.constant(g.features), params.structure));
    for (std::size_t u = 0; u < 7; ++u) {
      CHECK(pi(u, u) == 0.0);
      for (std::size_t v = 0; v < 7; ++v) {
        CHECK(pi(u, v) == pi(v, u));
        CHECK(pi(u, v) >= 0.0);
        CHECK(pi(u, v) <= 1.0);
      }
    }
  }
}

TEST_SUITE("concrete_sample") {
  TEST_CASE("hand examples") {
    Tape tape;
    Var high = tape.constant(Tensor::scalar(0.9));
    CHECK(tape.value(concrete_sample(tape, high, 0.1, Tensor::scalar(0.5), true)).item() > 0.9999);
    Var half = tape.constant(Tensor::scalar(0.5));
    CHECK(tape.value(concrete_sample(tape, half, 0.1, Tensor::scalar(0.5), true)).item() ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS((void)concrete_sample(tape, half, 0.0, Tensor::scalar(0.5), true), ParameterError);
  }

  TEST_CASE("relaxed samples lie in [0, 1] for extreme pi") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
    for (double pi : {0.0, 1e-9, 0.5, 1.0 - 1e-9, 1.0}) {
      for (int i = 0; i < 50; ++i) {
        Tape tape;
        const double s =
            tape.value(concrete_sample(tape, tape.constant(Tensor::scalar(pi)), 0.1, Tensor::scalar(u(rng)), true))
                .item();
        CHECK(std::isfinite(s));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    }
  }

  TEST_CASE("hard-rounded means track pi at low temperature") {
    // 3 sigma of a Bernoulli mean over 2e4 draws is at most ~0.011.
    constexpr int kDraws = 20000;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double pi : {0.1, 0.5, 0.9}) {
      Tensor noise = Tensor::matrix(1, kDraws);
      for (double& e : noise.data()) e = std::max(u(rng), 1e-300);
      Tape tape;
      const auto& s = tape.value(concrete_sample(tape, tape.constant(Tensor::matrix(1, kDraws, pi)), 0.1, noise, true));
      double hits = 0.0;
      for (double x : s.data()) hits += x >= 0.5 ? 1.0 : 0.0;
      CHECK(std::abs(hits / kDraws - pi) < 0.015);
    }
  }

  TEST_CASE("evaluation modes") {
    Tape tape;
    Var pi = tape.constant(Tensor::row({0.2, 0.7}));
    const Tensor dummy = Tensor::row({0.5, 0.5});
    CHECK(tape.value(concrete_sample(tape, pi, 0.1, dummy, false)) == Tensor::row({0.2, 0.7}));
    CHECK(tape.value(concrete_sample(tape, pi, 0.1, dummy, false, EvalAdjacency::hard)) == Tensor::row({0.0, 1.0}));
  }
}

TEST_SUITE("sparsify") {
  TEST_CASE("entries below a0 vanish") {
    Tape tape;
    Var a = tape.constant(Tensor::from_rows({{0.0, 0.05}, {0.05, 0.0}}));
    CHECK(tape.value(sparsify(tape, a, 0.1)) == Tensor::matrix(2, 2, 0.0));
    Var b = tape.constant(Tensor::from_rows({{0.0, 0.5}, {0.5, 0.0}}));
    CHECK(tape.value(sparsify(tape, b, 0.1)) == Tensor::from_rows({{0.0, 0.5}, {0.5, 0.0}}));
    CHECK(tape.value(sparsify(tape, b, 1.0 + 1e-9)) == Tensor::matrix(2, 2, 0.0));
    CHECK_THROWS_AS((void)sparsify(tape, b, -0.1), ParameterError);
  }

  TEST_CASE("output is symmetric with zero diagonal") {
    Tape tape;
    Var a = tape.constant(Tensor::from_rows({{0.9, 0.3, 0.8}, {0.5, 0.4, 0.05}, {0.6, 0.2, 0.7}}));
    const auto& s = tape.value(sparsify(tape, a, 0.1));
    for (std::size_t u = 0; u < 3; ++u) {
      CHECK(s(u, u) == 0.0);
      for (std::size_t v = 0; v < 3; ++v) CHECK(s(u, v) == s(v, u));
    }
    CHECK(s(0, 1) == doctest::Approx(0.4));
    CHECK(s(1, 2) == doctest::Approx(0.125));
  }
}

TEST_SUITE("generate") {
  TEST_CASE("output never depends on the input adjacency") {
    auto params = small_generator(4, 1);
    Graph g = random_graph(6, 4, 2);
    Graph rewired = g;
    rewired.adjacency = Tensor::matrix(6, 6, 1.0);
    for (std::size_t v = 0; v < 6; ++v) rewired.adjacency(v, v) = 0.0;
    for (bool train : {true, false}) {
      std::mt19937_64 r1(5), r2(5);
      const auto a = generate(g, params, r1, train);
      const auto b = generate(rewired, params, r2, train);
      CHECK(a.adjacency == b.adjacency);
      CHECK(a.features == b.features);
    }
  }

  TEST_CASE("generated graph is a valid graph with the input label") {
    auto params = small_generator(4, 3);
    Graph g = random_graph(9, 4, 4);
    g.label = 1;
    std::mt19937_64 rng(0);
    const auto ib = generate(g, params, rng, true);
    CHECK(ib.label == 1);
    CHECK_NOTHROW(ib.as_graph().validate());
    for (double w : ib.adjacency.data()) CHECK((w == 0.0 || w >= params.structure.threshold));
  }

  TEST_CASE("dot export lists every edge once") {
    const Graph g = random_graph(4, 2, 1);
    std::ostringstream out;
    write_dot(out, g, "g");
    const std::string s = out.str();
    CHECK(s.find("graph \"g\"") != std::string::npos);
    std::size_t count = 0;
    for (std::size_t pos = s.find("--"); pos != std::string::npos; pos = s.find("--", pos + 2)) ++count;
    CHECK(count == 3);
  }
}

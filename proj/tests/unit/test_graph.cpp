#include <set>
#include <sstream>

#include "doctest.h"
#include "vibgsl/errors.hpp"
#include "vibgsl/graph.hpp"

using namespace vibgsl;

namespace {

Graph triangle() {
  return Graph::from_edges(Tensor::matrix(3, 2, 1.0), {{0, 1}, {0, 2}, {1, 2}}, 0);
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("from_edges builds a symmetric adjacency") {
    const Graph g = triangle();
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 3);
    for (std::size_t u = 0; u < 3; ++u)
      for (std::size_t v = 0; v < 3; ++v) CHECK(g.adjacency(u, v) == g.adjacency(v, u));
    CHECK(g.adjacency(1, 1) == 0.0);
    CHECK_NOTHROW(g.validate());
  }

  TEST_CASE("validate rejects broken invariants") {
    Graph g = triangle();
    g.adjacency(0, 1) = 0.5;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g = triangle();
    g.adjacency(2, 2) = 1.0;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g = triangle();
    g.adjacency(0, 1) = g.adjacency(1, 0) = 1.5;
    CHECK_THROWS_AS(g.validate(), ValidationError);
  }

  TEST_CASE("dataset validation checks labels and widths") {
    GraphDataset ds;
    ds.graphs = {triangle(), triangle()};
    ds.infer_metadata();
    CHECK(ds.num_classes == 1);
    CHECK(ds.feature_dim == 2);
    ds.graphs[1].label = 3;
    CHECK_THROWS_AS(ds.validate(), ValidationError);
  }
}

TEST_SUITE("dataset io") {
  TEST_CASE("single two-node line") {
    std::istringstream in(R"({"n": 2, "x": [[1.0], [2.0]], "edges": [[0, 1]], "y": 0})" "\n");
    const auto ds = read_dataset(in);
    REQUIRE(ds.size() == 1);
    CHECK(ds.num_classes == 1);
    CHECK(ds.feature_dim == 1);
    CHECK(ds.graphs[0].num_edges() == 1);
  }

  TEST_CASE("empty input is an error") {
    std::istringstream in("");
    CHECK_THROWS_AS((void)read_dataset(in), ValidationError);
  }

  TEST_CASE("malformed lines report their line number") {
    std::istringstream bad_json(R"({"n": 2, "x": [[1.0], [2.0]], "edges": [], "y": 0})" "\n{not json\n");
    try {
      (void)read_dataset(bad_json);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream bad_edge(R"({"n": 2, "x": [[1.0], [2.0]], "edges": [[0, 5]], "y": 0})" "\n");
    CHECK_THROWS((void)read_dataset(bad_edge));
    std::istringstream missing(R"({"n": 2, "edges": [], "y": 0})" "\n");
    CHECK_THROWS((void)read_dataset(missing));
  }

  TEST_CASE("reversed or duplicate edges are rejected") {
    std::istringstream reversed(R"({"n": 2, "x": [[1.0], [2.0]], "edges": [[1, 0]], "y": 0})" "\n");
    CHECK_THROWS((void)read_dataset(reversed));
    std::istringstream dup(R"({"n": 3, "x": [[1],[2],[3]], "edges": [[0, 1], [0, 1]], "y": 0})" "\n");
    CHECK_THROWS((void)read_dataset(dup));
  }

  TEST_CASE("save then load round-trips bit-exactly") {
    SynthSpec spec;
    spec.num_graphs = 6;
    spec.nodes_per_graph = 7;
    spec.nuisance_hubs = 1;
    const auto ds = synth_two_class(spec);
    std::stringstream buf;
    write_dataset(buf, ds);
    auto back = read_dataset(buf, ds.name);
    CHECK(back == ds);
  }

  TEST_CASE("weighted round-trip keeps the weights") {
    Graph g = triangle();
    g.adjacency(0, 1) = g.adjacency(1, 0) = 0.375;
    GraphDataset ds;
    ds.graphs = {g};
    ds.infer_metadata();
    std::stringstream buf;
    write_dataset(buf, ds, true);
    const auto back = read_dataset(buf);
    CHECK(back.graphs[0].adjacency(0, 1) == 0.375);
  }
}

TEST_SUITE("synth") {
  TEST_CASE("shape, balance and determinism") {
    SynthSpec spec;
    spec.num_graphs = 40;
    const auto a = synth_two_class(spec);
    const auto b = synth_two_class(spec);
    CHECK(a == b);
    CHECK(a.size() == 40);
    CHECK(a.num_classes == 2);
    CHECK(a.feature_dim == 8);
    int ones = 0;
    for (const auto& g : a.graphs) {
      CHECK(g.num_nodes() == 15);
      CHECK_NOTHROW(g.validate());
      ones += *g.label;
    }
    CHECK(ones == 20);
    spec.seed = 1;
    CHECK_FALSE(synth_two_class(spec) == a);
  }

  TEST_CASE("hub datasets stay valid and deterministic") {
    SynthSpec spec;
    spec.num_graphs = 10;
    spec.nuisance_hubs = 2;
    const auto a = synth_two_class(spec);
    CHECK(a == synth_two_class(spec));
    CHECK_NOTHROW(a.validate());
    spec.noise_edges_ratio = 0.0;
    CHECK_NOTHROW(synth_two_class(spec).validate());
  }

  TEST_CASE("invalid specs are rejected") {
    SynthSpec spec;
    spec.signal_dims = 9;
    CHECK_THROWS_AS((void)synth_two_class(spec), ParameterError);
    spec = {};
    spec.nuisance_hubs = 15;
    CHECK_THROWS_AS((void)synth_two_class(spec), ParameterError);
  }
}

TEST_SUITE("perturb") {
  TEST_CASE("triangle with a third removed keeps two edges") {
    const auto r = perturb_edges(triangle(), {1.0 / 3.0, PerturbMode::remove, 7});
    CHECK(r.graph.num_edges() == 2);
    CHECK_FALSE(r.saturated);
  }

  TEST_CASE("removal keeps a subset and addition a superset") {
    SynthSpec spec;
    spec.num_graphs = 4;
    for (const auto& g : synth_two_class(spec).graphs) {
      const auto before = g.edge_list();
      const std::set<std::pair<std::size_t, std::size_t>> orig(before.begin(), before.end());
      const auto removed = perturb_edges(g, {0.5, PerturbMode::remove, 3}).graph;
      CHECK(removed.num_edges() == g.num_edges() - g.num_edges() / 2);
      for (const auto& e : removed.edge_list()) CHECK(orig.count(e) == 1);
      const auto added = perturb_edges(g, {0.5, PerturbMode::add, 3}).graph;
      CHECK(added.num_edges() == g.num_edges() + g.num_edges() / 2);
      for (const auto& e : before) CHECK(added.adjacency(e.first, e.second) == g.adjacency(e.first, e.second));
      CHECK(removed.features == g.features);
    }
  }

  TEST_CASE("ratio zero is the identity and the same seed repeats") {
    const Graph g = synth_two_class(SynthSpec{}).graphs[0];
    CHECK(perturb_edges(g, {0.0, PerturbMode::remove, 1}).graph == g);
    CHECK(perturb_edges(g, {0.4, PerturbMode::add, 9}).graph == perturb_edges(g, {0.4, PerturbMode::add, 9}).graph);
  }

  TEST_CASE("add on a complete graph saturates") {
    const auto r = perturb_edges(triangle(), {1.0, PerturbMode::add, 0});
    CHECK(r.saturated);
    CHECK(r.graph.num_edges() == 3);
  }

  TEST_CASE("ratio outside [0, 1] is rejected") {
    CHECK_THROWS_AS((void)perturb_edges(triangle(), {1.5, PerturbMode::remove, 0}), ParameterError);
    CHECK_THROWS_AS((void)perturb_edges(triangle(), {-0.1, PerturbMode::remove, 0}), ParameterError);
  }
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vibgsl/errors.hpp"
#include "vibgsl/harness.hpp"
#include "vibgsl/info.hpp"

namespace py = pybind11;
using namespace vibgsl;

namespace {

py::array_t<double> to_numpy(const Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Tensor from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  Tensor t = Tensor::matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

TrainConfig parse_config(const std::string& json) {
  return json.empty() ? TrainConfig{} : config_from_json(nlohmann::ordered_json::parse(json));
}

}  // namespace

PYBIND11_MODULE(_vibgsl, m) {
  m.doc() = "Graph structure learning with a variational information bottleneck.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

  py::class_<Graph>(m, "Graph")
      .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                       const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                       std::optional<int> label) {
             Graph g{from_numpy(x), from_numpy(a), label};
             g.validate();
             return g;
           }),
           py::arg("features"), py::arg("adjacency"), py::arg("label") = py::none())
      .def_property_readonly("features", [](const Graph& g) { return to_numpy(g.features); })
      .def_property_readonly("adjacency", [](const Graph& g) { return to_numpy(g.adjacency); })
      .def_readwrite("label", &Graph::label)
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def("edge_list", &Graph::edge_list);

  py::class_<GraphDataset>(m, "Dataset")
      .def(py::init([](std::vector<Graph> graphs, std::string name) {
             GraphDataset ds;
             ds.graphs = std::move(graphs);
             ds.name = std::move(name);
             ds.infer_metadata();
             ds.validate();
             return ds;
           }),
           py::arg("graphs"), py::arg("name") = "")
      .def_static("load", [](const std::string& path) { return load_dataset(path); })
      .def("save", [](const GraphDataset& ds, const std::string& path) { save_dataset(ds, path); })
      .def("__len__", &GraphDataset::size)
      .def("__getitem__", [](const GraphDataset& ds, std::size_t i) {
        if (i >= ds.size()) throw py::index_error();
        return ds.graphs[i];
      })
      .def_readonly("num_classes", &GraphDataset::num_classes)
      .def_readonly("feature_dim", &GraphDataset::feature_dim)
      .def_readonly("name", &GraphDataset::name);

  m.def(
      "synth",
      [](std::size_t graphs, std::size_t nodes, std::size_t features, std::size_t signal_dims, double noise_edges,
         std::size_t nuisance_hubs, std::uint64_t seed) {
        SynthSpec spec;
        spec.num_graphs = graphs;
        spec.nodes_per_graph = nodes;
        spec.feature_dim = features;
        spec.signal_dims = signal_dims;
        spec.noise_edges_ratio = noise_edges;
        spec.nuisance_hubs = nuisance_hubs;
        spec.seed = seed;
        return synth_two_class(spec);
      },
      py::arg("graphs") = 200, py::arg("nodes") = 15, py::arg("features") = 8, py::arg("signal_dims") = 2,
      py::arg("noise_edges") = 0.3, py::arg("nuisance_hubs") = 2, py::arg("seed") = 0);

  m.def(
      "perturb",
      [](const Graph& g, double ratio, const std::string& mode, std::uint64_t seed) {
        return perturb_edges(g, {ratio, parse_perturb_mode(mode), seed}).graph;
      },
      py::arg("graph"), py::arg("ratio"), py::arg("mode") = "remove", py::arg("seed") = 0);

  m.def("_default_config", [] { return config_json(TrainConfig{}).dump(); });
  m.def("_resolve_config", [](const std::string& json) { return config_json(parse_config(json)).dump(); });

  m.def(
      "_cross_validate",
      [](const GraphDataset& ds, const std::string& config) {
        const auto c = parse_config(config);
        py::gil_scoped_release release;
        return report_json(cross_validate(ds, c)).dump();
      },
      py::arg("dataset"), py::arg("config") = "");
  m.def(
      "_beta_sweep",
      [](const GraphDataset& ds, const std::string& config, const std::vector<double>& betas) {
        const auto c = parse_config(config);
        py::gil_scoped_release release;
        return reports_json(beta_sweep(ds, c, betas)).dump();
      },
      py::arg("dataset"), py::arg("config"), py::arg("betas"));
  m.def(
      "_train",
      [](const GraphDataset& ds, const std::string& config) {
        const auto c = parse_config(config);
        Model model;
        std::string report;
        {
          py::gil_scoped_release release;
          report = report_json(train(ds, c, &model)).dump();
        }
        return py::make_tuple(report, model);
      },
      py::arg("dataset"), py::arg("config") = "");

  py::class_<Model>(m, "Model")
      .def("predict", [](Model& model, const Graph& g, std::uint64_t seed) { return predict(model, g, seed); },
           py::arg("graph"), py::arg("seed") = 0)
      .def("ib_graph",
           [](Model& model, const Graph& g, std::uint64_t seed) { return export_ib_graph(model, g, seed).as_graph(); },
           py::arg("graph"), py::arg("seed") = 0)
      .def_property_readonly("num_parameters", [](Model& model) {
        std::size_t n = 0;
        for (const Tensor* p : model.parameters()) n += p->size();
        return n;
      });

  m.def(
      "verify_bounds",
      [](std::size_t instances, std::uint64_t seed) {
        const auto r = info::verify_bounds(instances, seed);
        py::dict out;
        out["instances"] = r.instances;
        out["failures"] = r.failures;
        out["max_violation"] = r.max_violation;
        py::list checks;
        for (const auto& c : r.checks) {
          py::dict d;
          d["name"] = c.name;
          d["failures"] = c.failures;
          d["max_violation"] = c.max_violation;
          if (c.max_tight_gap >= 0.0) d["max_tight_gap"] = c.max_tight_gap;
          checks.append(d);
        }
        out["checks"] = checks;
        return out;
      },
      py::arg("instances") = 1000, py::arg("seed") = 0);

  m.def(
      "gradcheck",
      [](std::uint64_t seed, double tolerance) {
        GradcheckOptions opts;
        opts.tolerance = tolerance;
        auto results = check_primitive_ops(seed, opts);
        for (auto& r : check_model_gradients(seed, opts)) results.push_back(std::move(r));
        py::dict out;
        for (const auto& r : results) out[py::str(r.name)] = r.max_error;
        return out;
      },
      py::arg("seed") = 0, py::arg("tolerance") = 1e-3);

  m.def(
      "gaussian_kl",
      [](const std::vector<double>& mu, const std::vector<double>& sigma) {
        if (mu.size() != sigma.size()) throw DimensionError("mu and sigma lengths differ");
        return kl_to_standard_normal(mu, sigma);
      },
      py::arg("mu"), py::arg("sigma"));
  m.def("entropy", [](const std::vector<double>& p) {
    return info::entropy(info::DiscreteJoint({"A"}, {p.size()}, p), {"A"});
  });
  m.def(
      "timing_probe",
      [](const std::vector<std::size_t>& sizes, const std::string& config) {
        const auto r = timing_probe(parse_config(config), sizes);
        py::dict out;
        out["exponent"] = r.exponent;
        out["coefficient"] = r.coefficient;
        py::list points;
        for (const auto& p : r.points) points.append(py::make_tuple(p.nodes, p.seconds));
        out["points"] = points;
        return out;
      },
      py::arg("sizes"), py::arg("config") = "");
}

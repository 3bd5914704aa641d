#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vibgsl/tensor.hpp"

namespace vibgsl {

/// Undirected graph with dense node features (n×d) and a dense symmetric
/// adjacency (n×n, entries in [0, 1], zero diagonal).
struct Graph {
  Tensor features;
  Tensor adjacency;
  std::optional<int> label;

  [[nodiscard]] static Graph from_edges(Tensor features, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                        std::optional<int> label = std::nullopt);

  [[nodiscard]] std::size_t num_nodes() const { return features.rows(); }
  [[nodiscard]] std::size_t feature_dim() const { return features.cols(); }
  /// Undirected pairs u<v with a non-zero weight.
  [[nodiscard]] std::size_t num_edges() const;
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
  /// Throws ValidationError on asymmetric adjacency, self-loops, weights
  /// outside [0, 1] or a shape mismatch.
  void validate() const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

struct GraphDataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::size_t feature_dim = 0;
  std::string name;

  [[nodiscard]] std::size_t size() const noexcept { return graphs.size(); }
  [[nodiscard]] bool empty() const noexcept { return graphs.empty(); }
  /// Every graph valid, shared feature_dim, labels in [0, num_classes).
  void validate() const;
  /// Recomputes feature_dim and num_classes (max label + 1) from the graphs.
  void infer_metadata();

  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

// JSON-lines format, one graph per line:
//   {"n": 3, "x": [[..],[..],[..]], "edges": [[0,1],[1,2]], "y": 1}
// An optional "w" array carries per-edge weights for weighted graphs.
// Writers emit edges with u < v, sorted lexicographically.
[[nodiscard]] GraphDataset read_dataset(std::istream& in, std::string name = "");
[[nodiscard]] GraphDataset load_dataset(const std::filesystem::path& path);
void write_graph_line(std::ostream& out, const Graph& g, bool with_weights = false);
void write_dataset(std::ostream& out, const GraphDataset& ds, bool with_weights = false);
void save_dataset(const GraphDataset& ds, const std::filesystem::path& path, bool with_weights = false);

struct SynthSpec {
  std::size_t num_graphs = 200;
  std::size_t nodes_per_graph = 15;
  std::size_t feature_dim = 8;
  std::size_t signal_dims = 2;
  /// Extra random edges as a fraction of the clean edge count.
  double noise_edges_ratio = 0.3;
  /// Class means of the signal dims are +-separation/2.
  double separation = 1.0;
  /// Per-node standard deviation of every feature dim.
  double node_noise = 1.0;
  /// Density of edges inside a community; cross-community density is chosen
  /// so both classes share the same expected degree.
  double intra_density = 0.6;
  /// When false both classes use the two-community layout.
  bool structure_signal = true;
  /// Nodes per graph whose features are label-free noise with standard
  /// deviation hub_noise in every dim. When non-zero, each noise edge joins
  /// one of these nodes to a random non-neighbour.
  std::size_t nuisance_hubs = 2;
  double hub_noise = 3.0;
  std::uint64_t seed = 0;
};

/// Balanced two-class dataset. Class 0 graphs have two communities and
/// class 1 graphs three; the signal dims carry a class-dependent mean and the
/// remaining dims are label-independent noise.
[[nodiscard]] GraphDataset synth_two_class(const SynthSpec& spec);

enum class PerturbMode { remove, add };

struct PerturbationSpec {
  double ratio = 0.0;
  PerturbMode mode = PerturbMode::remove;
  std::uint64_t seed = 0;
};

struct PerturbResult {
  Graph graph;
  /// Set when add mode could not insert the requested number of edges.
  bool saturated = false;
};

/// Removes or inserts floor(ratio * |E|) undirected edges chosen uniformly
/// without replacement. Inserted edges get weight 1.
[[nodiscard]] PerturbResult perturb_edges(const Graph& g, const PerturbationSpec& spec);
/// Per-graph perturbation with seeds derived from spec.seed and the graph index.
[[nodiscard]] GraphDataset perturb_dataset(const GraphDataset& ds, const PerturbationSpec& spec);

[[nodiscard]] std::string to_string(PerturbMode mode);
[[nodiscard]] PerturbMode parse_perturb_mode(const std::string& s);

/// SplitMix64 finaliser; used to derive independent seeds from (base, stream).
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace vibgsl

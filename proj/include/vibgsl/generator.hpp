#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "vibgsl/graph.hpp"
#include "vibgsl/tensor.hpp"

namespace vibgsl {

/// Learnable per-dimension feature gate. The relaxed mask is
/// sigmoid(mask_logits / temperature); evaluation hard-binarises it at 0.5.
struct FeatureMaskParams {
  Tensor mask_logits;  // 1×d
  double temperature = 1.0;

  [[nodiscard]] static FeatureMaskParams init(std::size_t feature_dim, double initial_logit = 0.0);
  [[nodiscard]] std::vector<Tensor*> parameters() { return {&mask_logits}; }
};

/// Two-layer perceptron producing node embeddings for edge scoring, plus
/// the concrete temperature t and sparsification threshold a0.
struct StructureLearnerParams {
  Tensor w1, b1, w2, b2;
  double temperature = 0.1;
  double threshold = 0.1;

  [[nodiscard]] static StructureLearnerParams init(std::size_t feature_dim, std::size_t hidden,
                                                   std::size_t embed_dim, std::mt19937_64& rng);
  [[nodiscard]] std::vector<Tensor*> parameters() { return {&w1, &b1, &w2, &b2}; }
  void validate() const;
};

/// How evaluation mode turns edge probabilities into an adjacency.
enum class EvalAdjacency { expected, hard };

[[nodiscard]] std::string to_string(EvalAdjacency mode);
[[nodiscard]] EvalAdjacency parse_eval_adjacency(const std::string& s);

/// Exogenous randomness for one generator pass: a row permutation that
/// realises X_r, and one uniform draw per undirected pair (mirrored).
struct GeneratorNoise {
  std::vector<std::size_t> row_permutation;
  Tensor edge_uniform;  // n×n, symmetric, zero diagonal

  [[nodiscard]] static GeneratorNoise draw(std::size_t num_nodes, std::mt19937_64& rng);
};

struct GeneratorParams {
  FeatureMaskParams mask;
  StructureLearnerParams structure;
  EvalAdjacency eval_adjacency = EvalAdjacency::expected;

  [[nodiscard]] std::vector<Tensor*> parameters();
};

/// Tape handles of a generated IB-Graph.
struct IBGraphVars {
  Var features;        // X_IB
  Var adjacency;       // A_IB
  Var edge_probs;      // pi
  Var relaxed;         // concrete sample before sparsification
};

/// Plain values of a generated IB-Graph.
struct IBGraph {
  Tensor features;
  Tensor adjacency;
  Tensor edge_probs;
  std::optional<int> label;

  [[nodiscard]] Graph as_graph() const { return Graph{features, adjacency, label}; }
};

inline constexpr double kEdgeProbClamp = 1e-6;

/// X_r + (X - X_r) ⊙ M with M broadcast across rows.
[[nodiscard]] Var mask_features(Tape& tape, Var x, Var x_r, FeatureMaskParams& params, bool train);
/// pi = sigmoid(Z Zᵀ) with Z = NN(X_IB); the diagonal is forced to zero.
[[nodiscard]] Var edge_probabilities(Tape& tape, Var x_ib, StructureLearnerParams& params);
/// Binary-concrete relaxation of Bernoulli(pi). In training mode returns
/// sigmoid((logit(pi) + logit(u)) / t); evaluation returns pi or 1[pi >= 0.5].
[[nodiscard]] Var concrete_sample(Tape& tape, Var pi, double temperature, const Tensor& uniform, bool train,
                                  EvalAdjacency eval = EvalAdjacency::expected);
/// Symmetrise as (A + Aᵀ)/2, zero the diagonal, and drop entries below a0.
[[nodiscard]] Var sparsify(Tape& tape, Var a_relaxed, double a0);

/// mask_features -> edge_probabilities -> concrete_sample -> sparsify.
/// The input adjacency is never read.
[[nodiscard]] IBGraphVars generate(Tape& tape, const Graph& g, GeneratorParams& params,
                                   const GeneratorNoise& noise, bool train);
[[nodiscard]] IBGraph generate(const Graph& g, GeneratorParams& params, std::mt19937_64& rng, bool train);

/// Row-permuted copy of the features (the X_r draw).
[[nodiscard]] Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& permutation);

/// Graphviz rendering; edges carry their weights as pen width and label.
void write_dot(std::ostream& out, const Graph& g, const std::string& name);

}  // namespace vibgsl

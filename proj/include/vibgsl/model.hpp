#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "vibgsl/config.hpp"
#include "vibgsl/encoder.hpp"
#include "vibgsl/generator.hpp"
#include "vibgsl/gradcheck.hpp"
#include "vibgsl/graph.hpp"
#include "vibgsl/objective.hpp"

namespace vibgsl {

/// Generator, encoder and classifier for one training run. raw_gnn models
/// leave the generator unused and read the input adjacency directly.
struct Model {
  ModelKind kind = ModelKind::vib_gsl;
  GeneratorParams generator;
  EncoderParams encoder;
  ClassifierParams classifier;

  [[nodiscard]] static Model init(const TrainConfig& config, std::size_t feature_dim, int num_classes,
                                  std::uint64_t seed);
  [[nodiscard]] std::vector<Tensor*> parameters();
  /// Width of the representation fed to the classifier.
  [[nodiscard]] std::size_t representation_dim() const { return classifier.w1.rows(); }
};

/// All randomness consumed by one forward pass.
struct ForwardNoise {
  GeneratorNoise graph;
  Tensor eps;  // 1×K reparameterisation noise
};

[[nodiscard]] ForwardNoise draw_forward_noise(const Model& model, std::size_t num_nodes, std::mt19937_64& rng);

struct ForwardVars {
  IBGraphVars ib;       // unset for raw_gnn
  GaussianVars gauss;   // unset for raw_gnn
  Var z;
  Var logits;
  LossVars loss;
};

/// Training mode samples the concrete relaxation and z = mu + sigma ⊙ eps.
/// Evaluation uses the hard mask, the eval adjacency mode and z = mu.
[[nodiscard]] ForwardVars forward(Tape& tape, Model& model, const Graph& g, const ForwardNoise& noise,
                                  double beta, bool train);

[[nodiscard]] int argmax(std::span<const double> logits);
/// Evaluation-mode prediction with X_r drawn from `eval_seed`.
[[nodiscard]] int predict(Model& model, const Graph& g, std::uint64_t eval_seed);
/// Evaluation-mode IB-Graph with X_r drawn from `eval_seed`.
[[nodiscard]] IBGraph export_ib_graph(Model& model, const Graph& g, std::uint64_t eval_seed);

/// Central-difference check of every model parameter through the full
/// generate -> encode -> reparameterise -> loss pipeline on a random 5-node
/// graph, for both backbones and two concrete temperatures. Noise is
/// redrawn until every relaxed edge sits at least 1e-3 from the threshold.
[[nodiscard]] std::vector<GradcheckResult> check_model_gradients(std::uint64_t seed,
                                                                 const GradcheckOptions& options = {});

}  // namespace vibgsl

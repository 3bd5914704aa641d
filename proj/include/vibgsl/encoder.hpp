#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "vibgsl/tensor.hpp"

namespace vibgsl {

enum class Backbone { gcn, gin };

[[nodiscard]] std::string to_string(Backbone b);
[[nodiscard]] Backbone parse_backbone(const std::string& s);

struct GcnLayerParams {
  Tensor weight;
};

/// GIN update: MLP((1 + eps) h_v + sum_u A[u, v] h_u) with a two-layer MLP.
struct GinLayerParams {
  Tensor w1, b1, w2, b2;
};

/// Stack of message-passing layers followed by mean pooling. The VIB
/// encoder's last layer is 2K wide (mu and the pre-softplus sigma); the
/// deterministic baseline uses a K-wide output.
struct EncoderParams {
  Backbone backbone = Backbone::gcn;
  std::vector<GcnLayerParams> gcn;
  std::vector<GinLayerParams> gin;
  std::size_t bottleneck = 16;
  double gin_eps = 0.0;

  [[nodiscard]] static EncoderParams init(Backbone backbone, std::size_t in_dim, std::size_t hidden,
                                          std::size_t out_dim, std::size_t num_layers, std::mt19937_64& rng);
  [[nodiscard]] std::size_t num_layers() const { return backbone == Backbone::gcn ? gcn.size() : gin.size(); }
  [[nodiscard]] std::size_t in_dim() const;
  [[nodiscard]] std::size_t out_dim() const;
  [[nodiscard]] std::vector<Tensor*> parameters();
};

/// D^-1/2 (A + I) D^-1/2 with weighted degrees of A + I.
[[nodiscard]] Var gcn_normalize(Tape& tape, Var adjacency);
/// relu(norm(A) H W); the relu is skipped when `activate` is false.
[[nodiscard]] Var gcn_layer(Tape& tape, Var h, Var adjacency, Var weight, bool activate = true);
/// Same as gcn_layer with a precomputed normalised adjacency.
[[nodiscard]] Var gcn_propagate(Tape& tape, Var h, Var normalized, Var weight, bool activate);
[[nodiscard]] Var gin_layer(Tape& tape, Var h, Var adjacency, GinLayerParams& params, double eps,
                            bool activate = true);

/// Node embeddings through every layer, then mean pooling to 1×out_dim.
[[nodiscard]] Var encode_pooled(Tape& tape, Var x, Var adjacency, EncoderParams& params);

struct GaussianVars {
  Var mu;     // 1×K
  Var sigma;  // 1×K, softplus(.) + floor
};

struct GaussianEmbedding {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> z;  // empty until sampled
};

inline constexpr double kSigmaFloor = 1e-6;

/// First K pooled outputs give mu; the remaining K give sigma through a
/// softplus with a small floor. Throws ContractError on a zero-node graph.
[[nodiscard]] GaussianVars encode(Tape& tape, Var x_ib, Var a_ib, EncoderParams& params);
[[nodiscard]] GaussianEmbedding to_embedding(const Tape& tape, const GaussianVars& vars);

}  // namespace vibgsl

#include "vibgsl/encoder.hpp"

#include "vibgsl/errors.hpp"
#include "vibgsl/init.hpp"
#include "vibgsl/ops.hpp"

namespace vibgsl {

std::string to_string(Backbone b) { return b == Backbone::gcn ? "gcn" : "gin"; }

Backbone parse_backbone(const std::string& s) {
  if (s == "gcn" || s == "GCN") return Backbone::gcn;
  if (s == "gin" || s == "GIN") return Backbone::gin;
  throw ParameterError("unknown backbone '" + s + "' (expected gcn|gin)");
}

EncoderParams EncoderParams::init(Backbone backbone, std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                                  std::size_t num_layers, std::mt19937_64& rng) {
  if (num_layers == 0) throw ParameterError("encoder needs at least one layer");
  EncoderParams p;
  p.backbone = backbone;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? in_dim : hidden;
    const std::size_t out = l + 1 == num_layers ? out_dim : hidden;
    if (backbone == Backbone::gcn) {
      p.gcn.push_back({glorot_uniform(in, out, rng)});
    } else {
      p.gin.push_back({glorot_uniform(in, hidden, rng), Tensor::matrix(1, hidden), glorot_uniform(hidden, out, rng),
                       Tensor::matrix(1, out)});
    }
  }
  p.bottleneck = out_dim / 2;
  return p;
}

std::size_t EncoderParams::in_dim() const {
  return backbone == Backbone::gcn ? gcn.front().weight.rows() : gin.front().w1.rows();
}

std::size_t EncoderParams::out_dim() const {
  return backbone == Backbone::gcn ? gcn.back().weight.cols() : gin.back().w2.cols();
}

std::vector<Tensor*> EncoderParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : gcn) out.push_back(&l.weight);
  for (auto& l : gin) {
    out.push_back(&l.w1);
    out.push_back(&l.b1);
    out.push_back(&l.w2);
    out.push_back(&l.b2);
  }
  return out;
}

Var gcn_normalize(Tape& tape, Var adjacency) {
  const Shape& s = tape.shape(adjacency);
  if (s.size() != 2 || s[0] != s[1]) throw DimensionError("gcn_normalize: adjacency " + shape_string(s));
  Var with_loops = add(tape, adjacency, tape.constant(Tensor::identity(s[0])));
  // Self-loop weight 1 keeps every degree >= 1.
  Var inv_sqrt = power(tape, sum(tape, with_loops, 1), -0.5);
  return mul(tape, with_loops, matmul(tape, inv_sqrt, transpose(tape, inv_sqrt)));
}

Var gcn_propagate(Tape& tape, Var h, Var normalized, Var weight, bool activate) {
  Var out = matmul(tape, normalized, matmul(tape, h, weight));
  return activate ? relu(tape, out) : out;
}

Var gcn_layer(Tape& tape, Var h, Var adjacency, Var weight, bool activate) {
  return gcn_propagate(tape, h, gcn_normalize(tape, adjacency), weight, activate);
}

Var gin_layer(Tape& tape, Var h, Var adjacency, GinLayerParams& params, double eps, bool activate) {
  const std::size_t n = tape.shape(h)[0];
  Var agg = add(tape, scale(tape, h, 1.0 + eps), matmul(tape, adjacency, h));
  Var hidden = relu(tape, add(tape, matmul(tape, agg, tape.parameter(params.w1)),
                              broadcast_rows(tape, tape.parameter(params.b1), n)));
  Var out = add(tape, matmul(tape, hidden, tape.parameter(params.w2)),
                broadcast_rows(tape, tape.parameter(params.b2), n));
  return activate ? relu(tape, out) : out;
}

Var encode_pooled(Tape& tape, Var x, Var adjacency, EncoderParams& params) {
  const Shape& sx = tape.shape(x);
  if (sx.size() != 2 || sx[0] == 0) throw ContractError("encode needs a graph with at least one node");
  if (sx[1] != params.in_dim()) {
    throw DimensionError("encoder expects feature width " + std::to_string(params.in_dim()) + ", got " +
                         shape_string(sx));
  }
  const std::size_t layers = params.num_layers();
  Var h = x;
  if (params.backbone == Backbone::gcn) {
    Var norm = gcn_normalize(tape, adjacency);
    for (std::size_t l = 0; l < layers; ++l) {
      h = gcn_propagate(tape, h, norm, tape.parameter(params.gcn[l].weight), l + 1 < layers);
    }
  } else {
    for (std::size_t l = 0; l < layers; ++l) {
      h = gin_layer(tape, h, adjacency, params.gin[l], params.gin_eps, l + 1 < layers);
    }
  }
  return mean(tape, h, 0);
}

GaussianVars encode(Tape& tape, Var x_ib, Var a_ib, EncoderParams& params) {
  const std::size_t k = params.bottleneck;
  if (params.out_dim() != 2 * k) {
    throw DimensionError("encoder output width " + std::to_string(params.out_dim()) + " is not 2K = " +
                         std::to_string(2 * k));
  }
  Var pooled = encode_pooled(tape, x_ib, a_ib, params);
  GaussianVars out;
  out.mu = slice_cols(tape, pooled, 0, k);
  out.sigma = shift(tape, softplus(tape, slice_cols(tape, pooled, k, 2 * k)), kSigmaFloor);
  return out;
}

GaussianEmbedding to_embedding(const Tape& tape, const GaussianVars& vars) {
  GaussianEmbedding e;
  e.mu = tape.value(vars.mu).values();
  e.sigma = tape.value(vars.sigma).values();
  return e;
}

}  // namespace vibgsl

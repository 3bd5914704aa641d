#include "vibgsl/generator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "vibgsl/errors.hpp"
#include "vibgsl/init.hpp"
#include "vibgsl/ops.hpp"

namespace vibgsl {

FeatureMaskParams FeatureMaskParams::init(std::size_t feature_dim, double initial_logit) {
  return FeatureMaskParams{Tensor::matrix(1, feature_dim, initial_logit), 1.0};
}

StructureLearnerParams StructureLearnerParams::init(std::size_t feature_dim, std::size_t hidden,
                                                    std::size_t embed_dim, std::mt19937_64& rng) {
  StructureLearnerParams p;
  p.w1 = glorot_uniform(feature_dim, hidden, rng);
  p.b1 = Tensor::matrix(1, hidden);
  p.w2 = glorot_uniform(hidden, embed_dim, rng);
  p.b2 = Tensor::matrix(1, embed_dim);
  return p;
}

void StructureLearnerParams::validate() const {
  if (!(temperature > 0.0)) throw ParameterError("concrete temperature must be positive");
  if (!(threshold >= 0.0)) throw ParameterError("sparsification threshold a0 must be non-negative");
}

std::string to_string(EvalAdjacency mode) { return mode == EvalAdjacency::expected ? "expected" : "hard"; }

EvalAdjacency parse_eval_adjacency(const std::string& s) {
  if (s == "expected") return EvalAdjacency::expected;
  if (s == "hard") return EvalAdjacency::hard;
  throw ParameterError("unknown eval adjacency mode '" + s + "' (expected expected|hard)");
}

GeneratorNoise GeneratorNoise::draw(std::size_t num_nodes, std::mt19937_64& rng) {
  GeneratorNoise noise;
  noise.row_permutation.resize(num_nodes);
  std::iota(noise.row_permutation.begin(), noise.row_permutation.end(), std::size_t{0});
  std::shuffle(noise.row_permutation.begin(), noise.row_permutation.end(), rng);
  noise.edge_uniform = Tensor::matrix(num_nodes, num_nodes, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < num_nodes; ++u) {
    for (std::size_t v = u + 1; v < num_nodes; ++v) {
      double e = unit(rng);
      // logit(e) must stay finite.
      e = std::clamp(e, 1e-12, 1.0 - 1e-12);
      noise.edge_uniform(u, v) = e;
      noise.edge_uniform(v, u) = e;
    }
  }
  return noise;
}

std::vector<Tensor*> GeneratorParams::parameters() {
  std::vector<Tensor*> out = mask.parameters();
  for (Tensor* p : structure.parameters()) out.push_back(p);
  return out;
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& permutation) {
  if (permutation.size() != x.rows()) throw DimensionError("permutation length does not match row count");
  Tensor out = Tensor::matrix(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(permutation[r], c);
  return out;
}

namespace {

Tensor off_diagonal_ones(std::size_t n) {
  Tensor t = Tensor::matrix(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 0.0;
  return t;
}

}  // namespace

Var mask_features(Tape& tape, Var x, Var x_r, FeatureMaskParams& params, bool train) {
  const Shape& sx = tape.shape(x);
  if (sx != tape.shape(x_r)) {
    throw DimensionError("mask_features: X " + shape_string(sx) + " vs X_r " + shape_string(tape.shape(x_r)));
  }
  if (params.mask_logits.cols() != sx.at(1)) {
    throw DimensionError("mask_features: mask has " + std::to_string(params.mask_logits.cols()) +
                         " entries for feature dim " + std::to_string(sx.at(1)));
  }
  const std::size_t n = sx[0];
  Var mask;
  if (train) {
    mask = sigmoid(tape, scale(tape, tape.parameter(params.mask_logits), 1.0 / params.temperature));
  } else {
    Tensor hard = Tensor::matrix(1, params.mask_logits.cols());
    for (std::size_t c = 0; c < hard.size(); ++c) hard[c] = params.mask_logits[c] >= 0.0 ? 1.0 : 0.0;
    mask = tape.constant(std::move(hard));
  }
  Var gate = broadcast_rows(tape, mask, n);
  return add(tape, x_r, mul(tape, sub(tape, x, x_r), gate));
}

Var edge_probabilities(Tape& tape, Var x_ib, StructureLearnerParams& params) {
  const std::size_t n = tape.shape(x_ib)[0];
  Var h = relu(tape, add(tape, matmul(tape, x_ib, tape.parameter(params.w1)),
                         broadcast_rows(tape, tape.parameter(params.b1), n)));
  Var z = add(tape, matmul(tape, h, tape.parameter(params.w2)), broadcast_rows(tape, tape.parameter(params.b2), n));
  Var scores = matmul(tape, z, transpose(tape, z));
  return mul(tape, sigmoid(tape, scores), tape.constant(off_diagonal_ones(n)));
}

Var concrete_sample(Tape& tape, Var pi, double temperature, const Tensor& uniform, bool train, EvalAdjacency eval) {
  if (!(temperature > 0.0)) throw ParameterError("concrete temperature must be positive");
  Var p = clamp(tape, pi, kEdgeProbClamp, 1.0 - kEdgeProbClamp);
  if (!train) {
    if (eval == EvalAdjacency::expected) return p;
    Tensor hard = tape.value(p);
    for (double& x : hard.data()) x = x >= 0.5 ? 1.0 : 0.0;
    return tape.constant(std::move(hard));
  }
  if (uniform.shape() != tape.shape(pi)) {
    throw DimensionError("concrete_sample: noise " + shape_string(uniform.shape()) + " vs pi " +
                         shape_string(tape.shape(pi)));
  }
  Tensor noise_logit = uniform;
  for (double& e : noise_logit.data()) e = std::log(e) - std::log1p(-e);
  Var logit = sub(tape, log(tape, p), log(tape, shift(tape, neg(tape, p), 1.0)));
  return sigmoid(tape, scale(tape, add(tape, logit, tape.constant(std::move(noise_logit))), 1.0 / temperature));
}

Var sparsify(Tape& tape, Var a_relaxed, double a0) {
  if (!(a0 >= 0.0)) throw ParameterError("sparsification threshold a0 must be non-negative");
  const Shape s = tape.shape(a_relaxed);
  if (s.size() != 2 || s[0] != s[1]) throw DimensionError("sparsify needs a square matrix, got " + shape_string(s));
  Var sym = scale(tape, add(tape, a_relaxed, transpose(tape, a_relaxed)), 0.5);
  Var off = mul(tape, sym, tape.constant(off_diagonal_ones(s[0])));
  return threshold(tape, off, a0);
}

IBGraphVars generate(Tape& tape, const Graph& g, GeneratorParams& params, const GeneratorNoise& noise, bool train) {
  params.structure.validate();
  Var x = tape.constant(g.features);
  Var x_r = tape.constant(permute_rows(g.features, noise.row_permutation));
  IBGraphVars out;
  out.features = mask_features(tape, x, x_r, params.mask, train);
  out.edge_probs = edge_probabilities(tape, out.features, params.structure);
  out.relaxed =
      concrete_sample(tape, out.edge_probs, params.structure.temperature, noise.edge_uniform, train,
                      params.eval_adjacency);
  out.adjacency = sparsify(tape, out.relaxed, params.structure.threshold);
  return out;
}

IBGraph generate(const Graph& g, GeneratorParams& params, std::mt19937_64& rng, bool train) {
  Tape tape;
  const auto noise = GeneratorNoise::draw(g.num_nodes(), rng);
  const auto vars = generate(tape, g, params, noise, train);
  return IBGraph{tape.value(vars.features), tape.value(vars.adjacency), tape.value(vars.edge_probs), g.label};
}

void write_dot(std::ostream& out, const Graph& g, const std::string& name) {
  out << "graph \"" << name << "\" {\n";
  if (g.label) out << "  label=\"y=" << *g.label << "\";\n";
  for (std::size_t v = 0; v < g.num_nodes(); ++v) out << "  " << v << ";\n";
  out << std::setprecision(4);
  for (auto [u, v] : g.edge_list()) {
    const double w = g.adjacency(u, v);
    out << "  " << u << " -- " << v << " [weight=" << w << ", penwidth=" << (0.5 + 2.5 * w) << "];\n";
  }
  out << "}\n";
}

}  // namespace vibgsl

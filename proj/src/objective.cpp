#include "vibgsl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vibgsl/errors.hpp"
#include "vibgsl/init.hpp"
#include "vibgsl/ops.hpp"

namespace vibgsl {

ClassifierParams ClassifierParams::init(std::size_t in_dim, std::size_t hidden, std::size_t num_classes,
                                        std::mt19937_64& rng) {
  return ClassifierParams{glorot_uniform(in_dim, hidden, rng), Tensor::matrix(1, hidden),
                          glorot_uniform(hidden, num_classes, rng), Tensor::matrix(1, num_classes)};
}

Var reparameterize(Tape& tape, const GaussianVars& emb, const Tensor& eps) {
  const Shape& s = tape.shape(emb.mu);
  if (eps.size() != tape.value(emb.mu).size()) {
    throw DimensionError("reparameterize: noise " + shape_string(eps.shape()) + " vs mu " + shape_string(s));
  }
  Var noise = tape.constant(Tensor(s, eps.values()));
  return add(tape, emb.mu, mul(tape, emb.sigma, noise));
}

Var kl_to_standard_normal(Tape& tape, const GaussianVars& emb) {
  const auto& sigma = tape.value(emb.sigma);
  for (double s : sigma.data()) {
    if (!(s > 0.0)) throw ContractError("kl_to_standard_normal: sigma must be positive, got " + std::to_string(s));
  }
  const double k = static_cast<double>(sigma.size());
  Var quad = add(tape, mul(tape, emb.mu, emb.mu), mul(tape, emb.sigma, emb.sigma));
  // 1/2 (mu^2 + sigma^2) - ln sigma, summed, minus K/2.
  Var per_dim = sub(tape, scale(tape, quad, 0.5), log(tape, emb.sigma));
  return shift(tape, sum(tape, per_dim), -0.5 * k);
}

Var classify(Tape& tape, Var z, ClassifierParams& params) {
  const Shape& s = tape.shape(z);
  if (s.size() != 2 || s[0] != 1 || s[1] != params.w1.rows()) {
    throw DimensionError("classify: z " + shape_string(s) + " vs classifier input " +
                         std::to_string(params.w1.rows()));
  }
  Var h = relu(tape, add(tape, matmul(tape, z, tape.parameter(params.w1)), tape.parameter(params.b1)));
  return add(tape, matmul(tape, h, tape.parameter(params.w2)), tape.parameter(params.b2));
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] = std::exp(logits[i] - m));
  for (double& x : p) x /= total;
  return p;
}

double cross_entropy(std::span<const double> logits, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= logits.size()) {
    throw ParameterError("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                         std::to_string(logits.size()) + ")");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - m);
  return m + std::log(total) - logits[static_cast<std::size_t>(y)];
}

Var cross_entropy(Tape& tape, Var logits, int y) {
  const Tensor& v = tape.value(logits);
  const double value = cross_entropy(v.data(), y);
  return tape.record("cross_entropy", {logits}, Tensor::scalar(value), [logits, y](Tape& t, Var o) {
    const double g = t.grad(o)[0];
    const auto p = softmax(t.value(logits).data());
    auto gl = t.grad_buffer(logits);
    for (std::size_t i = 0; i < p.size(); ++i) gl[i] += g * (p[i] - (static_cast<int>(i) == y ? 1.0 : 0.0));
  });
}

LossVars vib_loss(Tape& tape, const GaussianVars& emb, Var logits, int y, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
  LossVars out;
  out.ce = cross_entropy(tape, logits, y);
  out.kl = kl_to_standard_normal(tape, emb);
  out.total = add(tape, out.ce, scale(tape, out.kl, beta));
  return out;
}

LossBreakdown breakdown(const Tape& tape, const LossVars& loss, double beta) {
  return LossBreakdown{tape.value(loss.total).item(), tape.value(loss.ce).item(), tape.value(loss.kl).item(), beta};
}

LossBreakdown batch_mean(std::span<const LossBreakdown> items) {
  LossBreakdown out;
  if (items.empty()) return out;
  for (const auto& b : items) {
    out.ce += b.ce;
    out.kl += b.kl;
  }
  const double n = static_cast<double>(items.size());
  out.ce /= n;
  out.kl /= n;
  out.beta = items.front().beta;
  out.total = out.ce + out.beta * out.kl;
  return out;
}

double kl_to_standard_normal(std::span<const double> mu, std::span<const double> sigma) {
  if (mu.size() != sigma.size()) throw DimensionError("kl: mu and sigma lengths differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma[i];
    if (!(s > 0.0)) throw ContractError("kl_to_standard_normal: sigma must be positive");
    kl += 0.5 * (mu[i] * mu[i] + s * s - 1.0 - 2.0 * std::log(s));
  }
  return kl;
}

Tensor draw_gaussian(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t = Tensor::matrix(1, k);
  for (double& x : t.data()) x = normal(rng);
  return t;
}

}  // namespace vibgsl

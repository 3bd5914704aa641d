#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "vibgsl/encoder.hpp"
#include "vibgsl/tensor.hpp"

namespace vibgsl {

/// Two-layer perceptron K -> hidden -> C producing raw logits.
struct ClassifierParams {
  Tensor w1, b1, w2, b2;

  [[nodiscard]] static ClassifierParams init(std::size_t in_dim, std::size_t hidden, std::size_t num_classes,
                                             std::mt19937_64& rng);
  [[nodiscard]] std::size_t num_classes() const { return w2.cols(); }
  [[nodiscard]] std::vector<Tensor*> parameters() { return {&w1, &b1, &w2, &b2}; }
};

/// z = mu + sigma ⊙ eps. eps is a constant, so gradients reach mu and sigma only.
[[nodiscard]] Var reparameterize(Tape& tape, const GaussianVars& emb, const Tensor& eps);
/// KL(N(mu, diag sigma^2) || N(0, I)) = 1/2 sum(mu^2 + sigma^2 - 1 - ln sigma^2).
[[nodiscard]] Var kl_to_standard_normal(Tape& tape, const GaussianVars& emb);
[[nodiscard]] Var classify(Tape& tape, Var z, ClassifierParams& params);
/// -log softmax(logits)[y] via log-sum-exp; gradient softmax - onehot(y).
[[nodiscard]] Var cross_entropy(Tape& tape, Var logits, int y);

struct LossVars {
  Var total;
  Var ce;
  Var kl;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double kl = 0.0;
  double beta = 0.0;
};

/// total = ce + beta * kl for one graph.
[[nodiscard]] LossVars vib_loss(Tape& tape, const GaussianVars& emb, Var logits, int y, double beta);
[[nodiscard]] LossBreakdown breakdown(const Tape& tape, const LossVars& loss, double beta);
/// Mean over per-graph breakdowns; total is recomputed as ce + beta * kl.
[[nodiscard]] LossBreakdown batch_mean(std::span<const LossBreakdown> items);

// Closed-form helpers on plain values.
[[nodiscard]] double kl_to_standard_normal(std::span<const double> mu, std::span<const double> sigma);
[[nodiscard]] double cross_entropy(std::span<const double> logits, int y);
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);
/// Standard-normal draws of length k.
[[nodiscard]] Tensor draw_gaussian(std::size_t k, std::mt19937_64& rng);

}  // namespace vibgsl

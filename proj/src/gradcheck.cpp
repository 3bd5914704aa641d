#include "vibgsl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "vibgsl/errors.hpp"
#include "vibgsl/ops.hpp"

namespace vibgsl {

namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& in : inputs) vars.push_back(tape.constant(in));
  return tape.value(f(tape, vars)).item();
}

}  // namespace

double gradient_error(double analytic, double numeric, const GradcheckOptions& options) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
}

GradcheckResult check_gradients(std::string name, const ScalarFunction& f, std::vector<Tensor> inputs,
                                const GradcheckOptions& options) {
  GradcheckResult result;
  result.name = std::move(name);

  std::vector<Tensor> params = inputs;
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : params) {
      p.set_requires_grad(true);
      vars.push_back(tape.parameter(p));
    }
    tape.backward(f(tape, vars));
  }

  const double h = options.step;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k][i];
      inputs[k][i] = x0 + h;
      const double up = evaluate(f, inputs);
      inputs[k][i] = x0 - h;
      const double down = evaluate(f, inputs);
      inputs[k][i] = x0;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = params[k].grad()[i];
      const double err = gradient_error(analytic, numeric, options);
      result.max_error = std::max(result.max_error, err);
      ++result.entries;
      if (!(err < options.tolerance)) ++result.failures;
    }
  }
  return result;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  Tensor uniform(Shape shape, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(std::move(shape));
    for (double& x : t.data()) x = dist(rng);
    return t;
  }
  // Values in [-2, 2] kept at least `gap` away from each point in `avoid`.
  Tensor away_from(Shape shape, std::initializer_list<double> avoid, double gap) {
    Tensor t = uniform(std::move(shape), -2.0, 2.0);
    for (double& x : t.data()) {
      for (double a : avoid) {
        if (std::abs(x - a) < gap) x = a + (x < a ? -gap : gap);
      }
    }
    return t;
  }
};

// Contract a tensor-valued op to a scalar with fixed random weights so every
// output entry contributes a distinct amount.
ScalarFunction weighted(std::function<Var(Tape&, std::span<const Var>)> op, Tensor weights) {
  return [op = std::move(op), weights = std::move(weights)](Tape& t, std::span<const Var> in) {
    Var y = op(t, in);
    Var w = t.constant(weights);
    return sum(t, mul(t, y, w));
  };
}

}  // namespace

std::vector<GradcheckResult> check_primitive_ops(std::uint64_t seed, const GradcheckOptions& options) {
  Sampler s{std::mt19937_64(seed)};
  std::vector<GradcheckResult> out;
  const Shape m34{3, 4};
  auto w = [&s](Shape shape) { return s.uniform(std::move(shape), -1.0, 1.0); };

  auto binary = [&](const char* name, BinaryOp op, Tensor a, Tensor b) {
    Tensor weights = w(a.size() == 1 ? b.shape() : a.shape());
    out.push_back(check_gradients(
        name, weighted([op](Tape& t, std::span<const Var> in) { return elementwise(t, op, in[0], in[1]); }, weights),
        {std::move(a), std::move(b)}, options));
  };
  binary("add", BinaryOp::add, s.uniform(m34, -2, 2), s.uniform(m34, -2, 2));
  binary("subtract", BinaryOp::subtract, s.uniform(m34, -2, 2), s.uniform(m34, -2, 2));
  binary("multiply", BinaryOp::multiply, s.uniform(m34, -2, 2), s.uniform(m34, -2, 2));
  binary("divide", BinaryOp::divide, s.uniform(m34, -2, 2), s.uniform(m34, 0.5, 2));
  binary("multiply_scalar", BinaryOp::multiply, s.uniform({1}, -2, 2), s.uniform(m34, -2, 2));

  auto unary = [&](const char* name, UnaryOp op, Tensor a) {
    Tensor weights = w(a.shape());
    out.push_back(check_gradients(
        name, weighted([op](Tape& t, std::span<const Var> in) { return activation(t, op, in[0]); }, weights),
        {std::move(a)}, options));
  };
  unary("negate", UnaryOp::negate, s.uniform(m34, -2, 2));
  unary("sigmoid", UnaryOp::sigmoid, s.uniform(m34, -2, 2));
  unary("softplus", UnaryOp::softplus, s.uniform(m34, -2, 2));
  unary("relu", UnaryOp::relu, s.away_from(m34, {0.0}, 1e-3));
  unary("log", UnaryOp::log, s.uniform(m34, 0.1, 2));
  unary("exp", UnaryOp::exp, s.uniform(m34, -2, 2));

  auto single = [&](const char* name, Shape out_shape, Tensor a, std::function<Var(Tape&, Var)> op) {
    out.push_back(check_gradients(
        name, weighted([op = std::move(op)](Tape& t, std::span<const Var> in) { return op(t, in[0]); },
                       w(std::move(out_shape))),
        {std::move(a)}, options));
  };
  single("sum", {1}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return sum(t, a); });
  single("mean", {1}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return mean(t, a); });
  single("sum_axis0", {1, 4}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return sum(t, a, 0); });
  single("mean_axis0", {1, 4}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return mean(t, a, 0); });
  single("mean_axis1", {3, 1}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return mean(t, a, 1); });
  single("scale", m34, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return scale(t, a, -1.7); });
  single("shift", m34, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return shift(t, a, 0.3); });
  single("power", m34, s.uniform(m34, 0.2, 2), [](Tape& t, Var a) { return power(t, a, -0.5); });
  single("transpose", {4, 3}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return transpose(t, a); });
  single("broadcast_rows", {5, 4}, s.uniform({1, 4}, -2, 2), [](Tape& t, Var a) { return broadcast_rows(t, a, 5); });
  single("slice_cols", {3, 2}, s.uniform(m34, -2, 2), [](Tape& t, Var a) { return slice_cols(t, a, 1, 3); });
  single("clamp", m34, s.away_from(m34, {-0.5, 0.5}, 1e-3), [](Tape& t, Var a) { return clamp(t, a, -0.5, 0.5); });
  single("threshold", m34, s.away_from(m34, {0.1}, 1e-3), [](Tape& t, Var a) { return threshold(t, a, 0.1); });

  out.push_back(check_gradients(
      "matmul",
      weighted([](Tape& t, std::span<const Var> in) { return matmul(t, in[0], in[1]); }, w({3, 5})),
      {s.uniform(m34, -2, 2), s.uniform({4, 5}, -2, 2)}, options));

  // Composite: sum(softplus(A B) * sigmoid(C)) exercises chained rules.
  out.push_back(check_gradients(
      "composite",
      [](Tape& t, std::span<const Var> in) {
        return sum(t, mul(t, softplus(t, matmul(t, in[0], in[1])), sigmoid(t, in[2])));
      },
      {s.uniform(m34, -2, 2), s.uniform({4, 2}, -2, 2), s.uniform({3, 2}, -2, 2)}, options));
  return out;
}

}  // namespace vibgsl

#pragma once

#include <cstddef>
#include <optional>

#include "vibgsl/tensor.hpp"

// Differentiable operations over Tape variables. Every op validates shapes
// eagerly and throws DimensionError naming the offending shapes. The only
// broadcasting is scalar-with-tensor (a one-element operand) plus the
// explicit broadcast_rows().
namespace vibgsl {

enum class BinaryOp { add, subtract, multiply, divide };
enum class UnaryOp { negate, sigmoid, softplus, relu, log, exp };
enum class ReduceOp { sum, mean };

[[nodiscard]] Var elementwise(Tape& tape, BinaryOp op, Var a, Var b);
[[nodiscard]] Var activation(Tape& tape, UnaryOp op, Var a);
/// Full reduction to a scalar, or along axis 0 (-> 1×n) / axis 1 (-> m×1).
[[nodiscard]] Var reduce(Tape& tape, ReduceOp op, Var a, std::optional<std::size_t> axis = std::nullopt);
[[nodiscard]] Var matmul(Tape& tape, Var a, Var b);

[[nodiscard]] inline Var add(Tape& t, Var a, Var b) { return elementwise(t, BinaryOp::add, a, b); }
[[nodiscard]] inline Var sub(Tape& t, Var a, Var b) { return elementwise(t, BinaryOp::subtract, a, b); }
[[nodiscard]] inline Var mul(Tape& t, Var a, Var b) { return elementwise(t, BinaryOp::multiply, a, b); }
[[nodiscard]] inline Var div(Tape& t, Var a, Var b) { return elementwise(t, BinaryOp::divide, a, b); }
[[nodiscard]] inline Var neg(Tape& t, Var a) { return activation(t, UnaryOp::negate, a); }
[[nodiscard]] inline Var sigmoid(Tape& t, Var a) { return activation(t, UnaryOp::sigmoid, a); }
[[nodiscard]] inline Var softplus(Tape& t, Var a) { return activation(t, UnaryOp::softplus, a); }
[[nodiscard]] inline Var relu(Tape& t, Var a) { return activation(t, UnaryOp::relu, a); }
[[nodiscard]] inline Var log(Tape& t, Var a) { return activation(t, UnaryOp::log, a); }
[[nodiscard]] inline Var exp(Tape& t, Var a) { return activation(t, UnaryOp::exp, a); }
[[nodiscard]] inline Var sum(Tape& t, Var a, std::optional<std::size_t> axis = std::nullopt) {
  return reduce(t, ReduceOp::sum, a, axis);
}
[[nodiscard]] inline Var mean(Tape& t, Var a, std::optional<std::size_t> axis = std::nullopt) {
  return reduce(t, ReduceOp::mean, a, axis);
}

/// a * s for a constant s.
[[nodiscard]] Var scale(Tape& tape, Var a, double s);
/// a + s for a constant s.
[[nodiscard]] Var shift(Tape& tape, Var a, double s);
/// a^p elementwise; requires a > 0.
[[nodiscard]] Var power(Tape& tape, Var a, double p);
[[nodiscard]] Var transpose(Tape& tape, Var a);
/// Repeats a 1×d row n times into n×d.
[[nodiscard]] Var broadcast_rows(Tape& tape, Var row, std::size_t n);
/// Columns [begin, end) of a rank-2 tensor.
[[nodiscard]] Var slice_cols(Tape& tape, Var a, std::size_t begin, std::size_t end);
/// Clamp to [lo, hi]; the gradient is zero where clamping was active.
[[nodiscard]] Var clamp(Tape& tape, Var a, double lo, double hi);
/// Zeroes entries below `cutoff`; gradient flows only through surviving entries.
[[nodiscard]] Var threshold(Tape& tape, Var a, double cutoff);

// Scalar helpers shared by ops and loss code.
[[nodiscard]] double stable_sigmoid(double x) noexcept;
[[nodiscard]] double stable_softplus(double x) noexcept;

}  // namespace vibgsl

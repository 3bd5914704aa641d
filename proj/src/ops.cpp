#include "vibgsl/ops.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "vibgsl/errors.hpp"

namespace vibgsl {

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) noexcept {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace {

const char* binary_name(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "add";
    case BinaryOp::subtract: return "subtract";
    case BinaryOp::multiply: return "multiply";
    case BinaryOp::divide: return "divide";
  }
  return "?";
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::negate: return "negate";
    case UnaryOp::sigmoid: return "sigmoid";
    case UnaryOp::softplus: return "softplus";
    case UnaryOp::relu: return "relu";
    case UnaryOp::log: return "log";
    case UnaryOp::exp: return "exp";
  }
  return "?";
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + " needs a matrix, got " + shape_string(t.shape()));
}

}  // namespace

Var elementwise(Tape& tape, BinaryOp op, Var a, Var b) {
  const Tensor& va = tape.value(a);
  const Tensor& vb = tape.value(b);
  // Scalar-with-tensor is the only broadcast; normalise so `a` is the full operand
  // when exactly one side is a scalar.
  const bool a_scalar = va.size() == 1 && vb.size() != 1;
  const bool b_scalar = vb.size() == 1 && va.size() != 1;
  if (!a_scalar && !b_scalar && va.shape() != vb.shape()) {
    throw DimensionError(std::string(binary_name(op)) + ": shape mismatch " + shape_string(va.shape()) + " vs " +
                         shape_string(vb.shape()));
  }
  const Shape out_shape = a_scalar ? vb.shape() : va.shape();
  const std::size_t n = a_scalar ? vb.size() : va.size();
  auto ia = [a_scalar](std::size_t i) { return a_scalar ? std::size_t{0} : i; };
  auto ib = [b_scalar](std::size_t i) { return b_scalar ? std::size_t{0} : i; };

  Tensor out(out_shape);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = va[ia(i)];
    const double y = vb[ib(i)];
    switch (op) {
      case BinaryOp::add: out[i] = x + y; break;
      case BinaryOp::subtract: out[i] = x - y; break;
      case BinaryOp::multiply: out[i] = x * y; break;
      case BinaryOp::divide: out[i] = x / y; break;
    }
  }

  return tape.record(binary_name(op), {a, b}, std::move(out), [op, a, b, n, ia, ib](Tape& t, Var o) {
    const auto g = t.grad(o);
    const bool need_a = t.requires_grad(a);
    const bool need_b = t.requires_grad(b);
    const auto& xa = t.value(a);
    const auto& xb = t.value(b);
    if (need_a) {
      auto ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < n; ++i) {
        switch (op) {
          case BinaryOp::add:
          case BinaryOp::subtract: ga[ia(i)] += g[i]; break;
          case BinaryOp::multiply: ga[ia(i)] += g[i] * xb[ib(i)]; break;
          case BinaryOp::divide: ga[ia(i)] += g[i] / xb[ib(i)]; break;
        }
      }
    }
    if (need_b) {
      auto gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < n; ++i) {
        switch (op) {
          case BinaryOp::add: gb[ib(i)] += g[i]; break;
          case BinaryOp::subtract: gb[ib(i)] -= g[i]; break;
          case BinaryOp::multiply: gb[ib(i)] += g[i] * xa[ia(i)]; break;
          case BinaryOp::divide: {
            const double y = xb[ib(i)];
            gb[ib(i)] -= g[i] * xa[ia(i)] / (y * y);
            break;
          }
        }
      }
    }
  });
}

Var activation(Tape& tape, UnaryOp op, Var a) {
  const Tensor& va = tape.value(a);
  Tensor out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double x = va[i];
    switch (op) {
      case UnaryOp::negate: out[i] = -x; break;
      case UnaryOp::sigmoid: out[i] = stable_sigmoid(x); break;
      case UnaryOp::softplus: out[i] = stable_softplus(x); break;
      case UnaryOp::relu: out[i] = x > 0.0 ? x : 0.0; break;
      case UnaryOp::log:
        if (!(x > 0.0)) throw DomainError("log of non-positive entry " + std::to_string(x));
        out[i] = std::log(x);
        break;
      case UnaryOp::exp: out[i] = std::exp(x); break;
    }
  }
  return tape.record(unary_name(op), {a}, std::move(out), [op, a](Tape& t, Var o) {
    const auto g = t.grad(o);
    const auto& x = t.value(a);
    const auto& y = t.value(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (op) {
        case UnaryOp::negate: ga[i] -= g[i]; break;
        case UnaryOp::sigmoid: ga[i] += g[i] * y[i] * (1.0 - y[i]); break;
        case UnaryOp::softplus: ga[i] += g[i] * stable_sigmoid(x[i]); break;
        case UnaryOp::relu: ga[i] += x[i] > 0.0 ? g[i] : 0.0; break;
        case UnaryOp::log: ga[i] += g[i] / x[i]; break;
        case UnaryOp::exp: ga[i] += g[i] * y[i]; break;
      }
    }
  });
}

Var reduce(Tape& tape, ReduceOp op, Var a, std::optional<std::size_t> axis) {
  const Tensor& va = tape.value(a);
  const char* name = op == ReduceOp::sum ? "sum" : "mean";
  if (!axis) {
    double s = 0.0;
    for (double x : va.data()) s += x;
    const double w = op == ReduceOp::mean ? 1.0 / static_cast<double>(va.size()) : 1.0;
    return tape.record(name, {a}, Tensor::scalar(s * w), [a, w](Tape& t, Var o) {
      const double g = t.grad(o)[0] * w;
      for (double& ga : t.grad_buffer(a)) ga += g;
    });
  }
  if (va.rank() > 2 || *axis >= va.rank()) {
    throw DimensionError(std::string(name) + ": axis " + std::to_string(*axis) + " out of range for shape " +
                         shape_string(va.shape()));
  }
  const std::size_t rows = va.rows();
  const std::size_t cols = va.cols();
  const bool over_rows = va.rank() == 1 ? true : *axis == 0;
  // Rank-1 input reduces along its only axis to a scalar.
  if (va.rank() == 1) return reduce(tape, op, a, std::nullopt);

  const std::size_t count = over_rows ? rows : cols;
  const double w = op == ReduceOp::mean ? 1.0 / static_cast<double>(count) : 1.0;
  Tensor out = over_rows ? Tensor::matrix(1, cols) : Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[over_rows ? c : r] += va(r, c);
  }
  for (double& x : out.data()) x *= w;
  return tape.record(name, {a}, std::move(out), [a, w, rows, cols, over_rows](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += w * g[over_rows ? c : r];
    }
  });
}

Var matmul(Tape& tape, Var a, Var b) {
  const Tensor& va = tape.value(a);
  const Tensor& vb = tape.value(b);
  require_rank2(va, "matmul");
  require_rank2(vb, "matmul");
  const std::size_t m = va.rows(), k = va.cols(), n = vb.cols();
  if (vb.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(va.shape()) + " x " +
                         shape_string(vb.shape()));
  }
  Tensor out = Tensor::matrix(m, n);
  const double* pa = va.data().data();
  const double* pb = vb.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double x = pa[i * k + p];
      if (x == 0.0) continue;
      const double* brow = pb + p * n;
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return tape.record("matmul", {a, b}, std::move(out), [a, b, m, k, n](Tape& t, Var o) {
    const double* g = t.grad(o).data();
    if (t.requires_grad(a)) {
      // dA = G * B^T
      const double* pb = t.value(b).data().data();
      double* ga = t.grad_buffer(a).data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * pb[p * n + j];
          ga[i * k + p] += s;
        }
      }
    }
    if (t.requires_grad(b)) {
      // dB = A^T * G
      const double* pa = t.value(a).data().data();
      double* gb = t.grad_buffer(b).data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double x = pa[i * k + p];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * g[i * n + j];
        }
      }
    }
  });
}

Var scale(Tape& tape, Var a, double s) {
  Tensor out = tape.value(a);
  for (double& x : out.data()) x *= s;
  return tape.record("scale", {a}, std::move(out), [a, s](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var shift(Tape& tape, Var a, double s) {
  Tensor out = tape.value(a);
  for (double& x : out.data()) x += s;
  return tape.record("shift", {a}, std::move(out), [a](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var power(Tape& tape, Var a, double p) {
  Tensor out = tape.value(a);
  for (double& x : out.data()) {
    if (!(x > 0.0)) throw DomainError("power: non-positive base " + std::to_string(x));
    x = std::pow(x, p);
  }
  return tape.record("power", {a}, std::move(out), [a, p](Tape& t, Var o) {
    const auto g = t.grad(o);
    const auto& x = t.value(a);
    const auto& y = t.value(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * p * y[i] / x[i];
  });
}

Var transpose(Tape& tape, Var a) {
  const Tensor& va = tape.value(a);
  require_rank2(va, "transpose");
  const std::size_t m = va.rows(), n = va.cols();
  Tensor out = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = va(i, j);
  return tape.record("transpose", {a}, std::move(out), [a, m, n](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

Var broadcast_rows(Tape& tape, Var row, std::size_t n) {
  const Tensor& v = tape.value(row);
  if (v.rank() != 2 || v.rows() != 1) {
    throw DimensionError("broadcast_rows needs a 1xd row, got " + shape_string(v.shape()));
  }
  const std::size_t d = v.cols();
  Tensor out = Tensor::matrix(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) = v[c];
  return tape.record("broadcast_rows", {row}, std::move(out), [row, n, d](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto gr = t.grad_buffer(row);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) gr[c] += g[r * d + c];
  });
}

Var slice_cols(Tape& tape, Var a, std::size_t begin, std::size_t end) {
  const Tensor& va = tape.value(a);
  require_rank2(va, "slice_cols");
  const std::size_t m = va.rows(), n = va.cols();
  if (begin >= end || end > n) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + shape_string(va.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out = Tensor::matrix(m, w);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < w; ++c) out(r, c) = va(r, begin + c);
  return tape.record("slice_cols", {a}, std::move(out), [a, m, n, w, begin](Tape& t, Var o) {
    const auto g = t.grad(o);
    auto ga = t.grad_buffer(a);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < w; ++c) ga[r * n + begin + c] += g[r * w + c];
  });
}

Var clamp(Tape& tape, Var a, double lo, double hi) {
  if (lo > hi) throw ParameterError("clamp: lo > hi");
  Tensor out = tape.value(a);
  for (double& x : out.data()) x = x < lo ? lo : (x > hi ? hi : x);
  return tape.record("clamp", {a}, std::move(out), [a, lo, hi](Tape& t, Var o) {
    const auto g = t.grad(o);
    const auto& x = t.value(a);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] >= lo && x[i] <= hi) ga[i] += g[i];
    }
  });
}

Var threshold(Tape& tape, Var a, double cutoff) {
  Tensor out = tape.value(a);
  for (double& x : out.data()) {
    if (x < cutoff) x = 0.0;
  }
  return tape.record("threshold", {a}, std::move(out), [a, cutoff](Tape& t, Var o) {
    const auto g = t.grad(o);
    const auto& x = t.value(a);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(x[i] < cutoff)) ga[i] += g[i];
    }
  });
}

}  // namespace vibgsl

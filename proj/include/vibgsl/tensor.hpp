#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vibgsl {

using Shape = std::vector<std::size_t>;

[[nodiscard]] std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// Model parameters are Tensors with requires_grad set; they are bound to a
/// Tape as leaves, and Tape::backward accumulates into their grad buffers.
/// Rank-1 and rank-2 shapes are the only ones the model code produces; a
/// scalar is a rank-1 tensor of size one.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  [[nodiscard]] static Tensor scalar(double value);
  [[nodiscard]] static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  [[nodiscard]] static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// 1×n row vector.
  [[nodiscard]] static Tensor row(std::vector<double> values);
  [[nodiscard]] static Tensor identity(std::size_t n);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  /// Rows/cols of a rank-2 tensor; a rank-1 tensor is viewed as a single row.
  [[nodiscard]] std::size_t rows() const {
    if (shape_.size() == 2) return shape_[0];
    if (shape_.size() != 1) throw_rank("rows()");
    return 1;
  }
  [[nodiscard]] std::size_t cols() const {
    if (shape_.size() == 2) return shape_[1];
    if (shape_.size() != 1) throw_rank("cols()");
    return shape_[0];
  }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  [[nodiscard]] double& operator[](std::size_t i) { return data_[i]; }
  [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
  [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  [[nodiscard]] double item() const;

  [[nodiscard]] bool requires_grad() const noexcept { return requires_grad_; }
  /// Enabling allocates a zeroed grad buffer; disabling drops it.
  void set_requires_grad(bool on);
  [[nodiscard]] bool has_grad() const noexcept { return !grad_.empty(); }
  [[nodiscard]] std::span<double> grad() noexcept { return grad_; }
  [[nodiscard]] std::span<const double> grad() const noexcept { return grad_; }
  void zero_grad();

  /// Value equality: shape and data only.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  [[noreturn]] void throw_rank(const char* what) const;

  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  std::vector<double> grad_;
};

/// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t id = npos;
  [[nodiscard]] bool valid() const noexcept { return id != npos; }
};

/// One recorded operation. Inputs always precede the output on the tape.
struct OpRecord {
  std::string_view op;
  std::vector<std::size_t> inputs;
  std::size_t output = 0;
};

/// Explicit computation record for reverse-mode differentiation.
///
/// Every differentiable op appends one OpRecord together with a local
/// gradient rule. backward() walks the records once, newest first, and
/// finally adds each leaf's gradient into the bound parameter Tensor.
class Tape {
 public:
  /// Local gradient rule: reads grad(out) and accumulates into the inputs
  /// through grad_buffer(). Only called when out requires grad.
  using BackwardFn = std::function<void(Tape&, Var out)>;

  Var constant(Tensor value);
  /// Binds a parameter as a leaf. The tensor must outlive the tape.
  Var parameter(Tensor& param);
  Var record(std::string_view op, std::initializer_list<Var> inputs, Tensor value, BackwardFn backward);

  [[nodiscard]] const Tensor& value(Var v) const;
  [[nodiscard]] const Shape& shape(Var v) const { return value(v).shape(); }
  [[nodiscard]] bool requires_grad(Var v) const;
  /// Gradient of the last backward() target with respect to v (zeros if unreached).
  [[nodiscard]] std::span<const double> grad(Var v) const;
  /// Accumulation buffer for v, allocated on first use during backward.
  [[nodiscard]] std::span<double> grad_buffer(Var v);

  void backward(Var loss);

  [[nodiscard]] const std::vector<OpRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }

  /// Name of the first op (in record order) whose output has a non-finite
  /// entry, or "leaf"/"constant" if an input is already non-finite.
  [[nodiscard]] std::optional<std::string> first_non_finite() const;

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    Tensor* param = nullptr;
    bool requires_grad = false;
    std::size_t record = Var::npos;
  };

  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<OpRecord> records_;
  std::vector<BackwardFn> backward_fns_;
};

}  // namespace vibgsl

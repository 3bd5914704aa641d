#include "vibgsl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

#include "vibgsl/errors.hpp"

namespace vibgsl {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " does not match " + std::to_string(data_.size()) +
                         " values");
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) { return Tensor({rows, cols}, fill); }

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw DimensionError("from_rows needs at least one row");
  const std::size_t cols = rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor::throw_rank(const char* what) const {
  throw DimensionError(std::string(what) + " needs rank <= 2, got " + shape_string(shape_));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on) {
    grad_.assign(data_.size(), 0.0);
  } else {
    grad_.clear();
  }
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

// ---------------------------------------------------------------------------

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.value.set_requires_grad(false);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  if (!param.requires_grad()) param.set_requires_grad(true);
  Node node;
  node.value = Tensor(param.shape(), std::vector<double>(param.data().begin(), param.data().end()));
  node.param = &param;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::record(std::string_view op, std::initializer_list<Var> inputs, Tensor value, BackwardFn backward) {
  OpRecord rec;
  rec.op = op;
  bool needs = false;
  for (Var in : inputs) {
    check(in);
    rec.inputs.push_back(in.id);
    needs = needs || nodes_[in.id].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  node.record = records_.size();
  nodes_.push_back(std::move(node));
  rec.output = nodes_.size() - 1;
  records_.push_back(std::move(rec));
  backward_fns_.push_back(needs ? std::move(backward) : BackwardFn{});
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return nodes_[v.id].value;
}

bool Tape::requires_grad(Var v) const {
  check(v);
  return nodes_[v.id].requires_grad;
}

std::span<const double> Tape::grad(Var v) const {
  check(v);
  return nodes_[v.id].grad;
}

std::span<double> Tape::grad_buffer(Var v) {
  check(v);
  auto& node = nodes_[v.id];
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  check(loss);
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_string(nodes_[loss.id].value.shape()));
  }
  for (auto& node : nodes_) node.grad.assign(node.value.size(), 0.0);
  nodes_[loss.id].grad[0] = 1.0;

  const std::size_t last = nodes_[loss.id].record;
  if (last != Var::npos) {
    for (std::size_t r = last + 1; r-- > 0;) {
      if (!backward_fns_[r]) continue;
      backward_fns_[r](*this, Var{records_[r].output});
    }
  }

  for (auto& node : nodes_) {
    if (node.param == nullptr) continue;
    auto g = node.param->grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
  }
}

std::optional<std::string> Tape::first_non_finite() const {
  auto finite = [](const Tensor& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](double x) { return std::isfinite(x); });
  };
  for (const auto& node : nodes_) {
    if (finite(node.value)) continue;
    if (node.record == Var::npos) return std::string(node.param ? "leaf" : "constant");
    return std::string(records_[node.record].op);
  }
  return std::nullopt;
}

}  // namespace vibgsl

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vibgsl/tensor.hpp"

namespace vibgsl {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one per parameter, plus the step counter.
/// Empty state is initialised lazily on the first step.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// In-place Adam update using each parameter's grad buffer.
/// Throws ContractError if non-empty state does not match the parameters.
void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamOptions& options);

void zero_grads(std::span<Tensor* const> params);

}  // namespace vibgsl

#pragma once

#include <cmath>
#include <cstddef>
#include <random>

#include "vibgsl/tensor.hpp"

namespace vibgsl {

/// fan_in×fan_out matrix drawn from U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
[[nodiscard]] inline Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t = Tensor::matrix(fan_in, fan_out);
  for (double& x : t.data()) x = dist(rng);
  return t;
}

}  // namespace vibgsl

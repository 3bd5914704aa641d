#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vibgsl/tensor.hpp"

namespace vibgsl {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Lower bound on the relative-error denominator, so entries near zero
  /// are judged by |analytic - numeric| / abs_floor.
  double abs_floor = 1e-6;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, abs_floor).
[[nodiscard]] double gradient_error(double analytic, double numeric, const GradcheckOptions& options);

struct GradcheckResult {
  std::string name;
  std::size_t entries = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

/// Builds a scalar from the bound inputs. Called once for the analytic
/// gradient and twice per input entry for central differences.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

[[nodiscard]] GradcheckResult check_gradients(std::string name, const ScalarFunction& f,
                                              std::vector<Tensor> inputs,
                                              const GradcheckOptions& options = {});

/// Finite-difference checks for every differentiable primitive on random
/// inputs in [-2, 2] (positive inputs for log / power).
[[nodiscard]] std::vector<GradcheckResult> check_primitive_ops(std::uint64_t seed,
                                                               const GradcheckOptions& options = {});

}  // namespace vibgsl

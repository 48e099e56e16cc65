#pragma once

#include <functional>
#include <span>
#include <vector>

#include "par/tape.hpp"

namespace par::num {

/// Builds a scalar loss on `tape` from parameter leaves bound in order.
using LossFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  Index worst_entry = 0;
  std::size_t coordinates = 0;
};

/// Compares tape gradients against central differences (f(p+h) - f(p-h)) / 2h
/// coordinate by coordinate. The relative error of one coordinate is
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const LossFn& fn, const std::vector<Matrix>& params, double h = 1e-5);

}  // namespace par::num

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "par/matrix.hpp"

namespace par::num {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

/// One bias-corrected Adam update applied in place. Moments are allocated
/// on the first call and must keep matching the parameter shapes afterwards.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state, double lr);

}  // namespace par::num

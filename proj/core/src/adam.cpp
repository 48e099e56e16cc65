#include "par/adam.hpp"

#include <cmath>
#include <string>

#include "par/tape.hpp"

namespace par::num {

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) throw NumericError("adam_step: parameter and gradient counts differ");
  if (!(lr > 0)) throw NumericError("adam_step: learning rate must be positive");
  if (state.first_moment.empty()) {
    for (Matrix* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) throw NumericError("adam_step: state tracks a different parameter set");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = grads[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    if (g.rows() != p.rows() || g.cols() != p.cols() || m.rows() != p.rows() || m.cols() != p.cols())
      throw NumericError("adam_step: shape mismatch at parameter " + std::to_string(i));
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.epsilon);
  }
}

}  // namespace par::num

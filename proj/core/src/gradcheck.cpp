#include "par/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace par::num {

namespace {

double evaluate(const LossFn& fn, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Matrix& p : params) vars.push_back(tape.constant(p));
  return fn(tape, vars).scalar();
}

}  // namespace

GradCheckResult grad_check(const LossFn& fn, const std::vector<Matrix>& params, double h) {
  if (!(h > 0)) throw NumericError("grad_check: step must be positive");

  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Matrix& p : params) vars.push_back(tape.parameter(p));
    Var loss = fn(tape, vars);
    tape.backward(loss);
    for (const Var& v : vars) analytic.push_back(v.grad());
  }

  GradCheckResult result;
  std::vector<Matrix> probe = params;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    Matrix& p = probe[k];
    for (Index e = 0; e < p.size(); ++e) {
      double& slot = p.data()[e];
      const double saved = slot;
      slot = saved + h;
      const double plus = evaluate(fn, probe);
      slot = saved - h;
      const double minus = evaluate(fn, probe);
      slot = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k].data()[e];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++result.coordinates;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_param = k;
        result.worst_entry = e;
      }
    }
  }
  return result;
}

}  // namespace par::num

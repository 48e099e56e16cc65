#include "par/ops.hpp"

#include <cmath>
#include <string>

namespace par::num {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NumericError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

void require_row(const char* op, const Matrix& x, Index row) {
  if (row < 0 || row >= x.rows())
    throw NumericError(std::string(op) + ": row " + std::to_string(row) + " out of range for " + shape(x));
}

Tape& tape_of(const Var& v) {
  if (!v.valid()) throw NumericError("operation on an unbound Var");
  return *v.tape();
}

// Elementwise op whose derivative is expressed through input and output values.
template <class Forward, class Derivative>
Var unary(const Var& x, Forward forward, Derivative derivative) {
  Tape& tape = tape_of(x);
  Matrix out = tape.value_of(x).unaryExpr(forward);
  return tape.record(std::move(out), {x}, [x, derivative](Tape& t, const Matrix& up, const Matrix& y) {
    const Matrix& in = t.value_of(x);
    t.accumulate_with(x, [&](Matrix& g) {
      g.array() += up.array() * in.binaryExpr(y, derivative).array();
    });
  });
}

double stable_log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Matrix& av = tape.value_of(a);
  const Matrix& bv = tape.value_of(b);
  if (av.cols() != bv.rows()) throw NumericError("matmul: inner dimension mismatch " + shape(av) + " * " + shape(bv));
  Matrix out;
  out.noalias() = av * bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(a, [&](Matrix& g) { g.noalias() += up * t.value_of(b).transpose(); });
    t.accumulate_with(b, [&](Matrix& g) { g.noalias() += t.value_of(a).transpose() * up; });
  });
}

Var add_bias(const Var& x, const Var& bias) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  const Matrix& bv = tape.value_of(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols())
    throw NumericError("add_bias: bias " + shape(bv) + " does not match " + shape(xv));
  Matrix out = xv.rowwise() + bv.row(0);
  return tape.record(std::move(out), {x, bias}, [x, bias](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate(x, up);
    t.accumulate_with(bias, [&](Matrix& g) { g.row(0) += up.colwise().sum(); });
  });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  require_same_shape("add", tape.value_of(a), tape.value_of(b));
  Matrix out = tape.value_of(a) + tape.value_of(b);
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate(a, up);
    t.accumulate(b, up);
  });
}

Var hadamard(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  require_same_shape("hadamard", tape.value_of(a), tape.value_of(b));
  Matrix out = tape.value_of(a).cwiseProduct(tape.value_of(b));
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(a, [&](Matrix& g) { g += up.cwiseProduct(t.value_of(b)); });
    t.accumulate_with(b, [&](Matrix& g) { g += up.cwiseProduct(t.value_of(a)); });
  });
}

Var leaky_relu(const Var& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Var relu(const Var& x) { return leaky_relu(x, 0.0); }

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
  return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var log_sigmoid(const Var& x) {
  return unary(x, stable_log_sigmoid, [](double v, double) { return stable_sigmoid(-v); });
}

Var row_softmax(const Var& x) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  Matrix out = (xv.colwise() - xv.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& up, const Matrix& y) {
    t.accumulate_with(x, [&](Matrix& g) {
      Eigen::VectorXd inner = up.cwiseProduct(y).rowwise().sum();
      g.array() += y.array() * (up.colwise() - inner).array();
    });
  });
}

Var row_log_softmax(const Var& x) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  Matrix shifted = xv.colwise() - xv.rowwise().maxCoeff();
  Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();
  Matrix out = shifted.colwise() - log_norm;
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& up, const Matrix& y) {
    t.accumulate_with(x, [&](Matrix& g) {
      Eigen::VectorXd total = up.rowwise().sum();
      g.array() += up.array() - y.array().exp().colwise() * total.array();
    });
  });
}

Var concat_cols(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Matrix& av = tape.value_of(a);
  const Matrix& bv = tape.value_of(b);
  if (av.rows() != bv.rows()) throw NumericError("concat_cols: row mismatch " + shape(av) + " vs " + shape(bv));
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const Index split = av.cols();
  return tape.record(std::move(out), {a, b}, [a, b, split](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(a, [&](Matrix& g) { g += up.leftCols(split); });
    t.accumulate_with(b, [&](Matrix& g) { g += up.rightCols(up.cols() - split); });
  });
}

Var gather_rows(const Var& x, const RowIndex& rows) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  Matrix out(static_cast<Index>(rows.size()), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_row("gather_rows", xv, rows[i]);
    out.row(static_cast<Index>(i)) = xv.row(rows[i]);
  }
  return tape.record(std::move(out), {x}, [x, rows](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) {
      for (std::size_t i = 0; i < rows.size(); ++i) g.row(rows[i]) += up.row(static_cast<Index>(i));
    });
  });
}

Var gather_entries(const Var& x, const RowIndex& rows, const RowIndex& cols) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  if (rows.size() != cols.size()) throw NumericError("gather_entries: rows and cols differ in length");
  Matrix out(static_cast<Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_row("gather_entries", xv, rows[i]);
    if (cols[i] < 0 || cols[i] >= xv.cols()) throw NumericError("gather_entries: column out of range");
    out(static_cast<Index>(i), 0) = xv(rows[i], cols[i]);
  }
  return tape.record(std::move(out), {x}, [x, rows, cols](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) {
      for (std::size_t i = 0; i < rows.size(); ++i) g(rows[i], cols[i]) += up(static_cast<Index>(i), 0);
    });
  });
}

Var mean_rows(const Var& x, const RowGroups& groups) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  Matrix out = Matrix::Zero(static_cast<Index>(groups.size()), xv.cols());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& group = groups[i];
    if (group.empty()) throw NumericError("mean_rows: mean over an empty row set");
    for (Index r : group) {
      require_row("mean_rows", xv, r);
      out.row(static_cast<Index>(i)) += xv.row(r);
    }
    out.row(static_cast<Index>(i)) /= static_cast<double>(group.size());
  }
  return tape.record(std::move(out), {x}, [x, groups](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) {
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const double w = 1.0 / static_cast<double>(groups[i].size());
        for (Index r : groups[i]) g.row(r) += w * up.row(static_cast<Index>(i));
      }
    });
  });
}

Var scatter_rows(const Var& x, const RowIndex& rows, Index n_rows) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  if (static_cast<Index>(rows.size()) != xv.rows())
    throw NumericError("scatter_rows: " + std::to_string(rows.size()) + " targets for " + shape(xv));
  Matrix out = Matrix::Zero(n_rows, xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_row("scatter_rows", out, rows[i]);
    out.row(rows[i]) += xv.row(static_cast<Index>(i));
  }
  return tape.record(std::move(out), {x}, [x, rows](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) {
      for (std::size_t i = 0; i < rows.size(); ++i) g.row(static_cast<Index>(i)) += up.row(rows[i]);
    });
  });
}

Var row_pair_dot(const Var& x, const std::vector<RowPair>& pairs) {
  Tape& tape = tape_of(x);
  const Matrix& xv = tape.value_of(x);
  Matrix out(static_cast<Index>(pairs.size()), 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    require_row("row_pair_dot", xv, pairs[k].first);
    require_row("row_pair_dot", xv, pairs[k].second);
    out(static_cast<Index>(k), 0) = xv.row(pairs[k].first).dot(xv.row(pairs[k].second));
  }
  return tape.record(std::move(out), {x}, [x, pairs](Tape& t, const Matrix& up, const Matrix&) {
    const Matrix& xv = t.value_of(x);
    t.accumulate_with(x, [&](Matrix& g) {
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double w = up(static_cast<Index>(k), 0);
        const auto [i, j] = pairs[k];
        g.row(i) += w * xv.row(j);
        g.row(j) += w * xv.row(i);
      }
    });
  });
}

Var add_scalar(const Var& x, double c) {
  Tape& tape = tape_of(x);
  Matrix out = tape.value_of(x).array() + c;
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& up, const Matrix&) { t.accumulate(x, up); });
}

Var scale(const Var& x, double c) {
  Tape& tape = tape_of(x);
  Matrix out = c * tape.value_of(x);
  return tape.record(std::move(out), {x},
                     [x, c](Tape& t, const Matrix& up, const Matrix&) { t.accumulate(x, c * up); });
}

Var log(const Var& x) {
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var negate(const Var& x) { return scale(x, -1.0); }

Var sum(const Var& x) {
  Tape& tape = tape_of(x);
  Matrix out = Matrix::Constant(1, 1, tape.value_of(x).sum());
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) { g.array() += up(0, 0); });
  });
}

Var squared_norm(const Var& x) {
  Tape& tape = tape_of(x);
  Matrix out = Matrix::Constant(1, 1, tape.value_of(x).squaredNorm());
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& up, const Matrix&) {
    t.accumulate_with(x, [&](Matrix& g) { g += (2.0 * up(0, 0)) * t.value_of(x); });
  });
}

}  // namespace par::num

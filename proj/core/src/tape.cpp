#include "par/tape.hpp"

#include <string>

namespace par::num {

const Matrix& Var::value() const {
  if (!tape_) throw NumericError("use of an unbound Var");
  return tape_->value_of(*this);
}

Matrix Var::grad() const {
  if (!tape_) throw NumericError("use of an unbound Var");
  return tape_->grad_of(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1)
    throw NumericError("scalar() on a " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + " value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, true, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
  if (!value.allFinite()) throw NumericError("operation produced a non-finite value");
  bool tracked = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw NumericError("operand recorded on a different tape");
    tracked = tracked || nodes_[in.id_].requires_grad;
  }
  Node node{std::move(value), {}, false, tracked, false, {}};
  if (tracked) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::ensure_grad(Node& node) {
  if (!node.has_grad) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    node.has_grad = true;
  }
}

Matrix Tape::grad_of(const Var& v) const {
  const Node& node = nodes_[v.id_];
  if (!node.has_grad) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::accumulate(const Var& v, const Matrix& delta) {
  accumulate_with(v, [&](Matrix& g) { g += delta; });
}

void Tape::backward(const Var& loss) {
  if (loss.tape_ != this) throw NumericError("loss recorded on a different tape");
  Node& root = nodes_[loss.id_];
  if (root.value.rows() != 1 || root.value.cols() != 1) throw NumericError("backward requires a scalar loss");
  // Interior gradients are recomputed from scratch on every call.
  for (Node& node : nodes_) {
    if (!node.leaf) {
      node.has_grad = false;
      node.grad.resize(0, 0);
    }
  }
  if (!root.requires_grad) return;
  ensure_grad(root);
  root.grad(0, 0) += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    // Backward functions only touch earlier nodes, so this reference stays valid.
    node.backward(*this, node.grad, node.value);
  }
}

void Tape::zero_grad() {
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad.resize(0, 0);
  }
}

}  // namespace par::num

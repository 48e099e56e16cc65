#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "par/matrix.hpp"

namespace par::num {

/// Thrown on shape mismatches and on any operation producing NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  const Matrix& value() const;
  /// Accumulated gradient; an all-zero matrix when nothing flowed into this node.
  Matrix grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 result.
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records primitive applications in execution order so gradients can be
/// propagated back from a scalar loss.
class Tape {
 public:
  /// Receives the gradient flowing into the node together with the node's own
  /// value and adds its contributions to the inputs via Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& upstream, const Matrix& value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var constant(double value);
  /// A leaf whose gradient is tracked.
  Var parameter(Matrix value);

  /// Appends an operation result. `fn` is dropped when no input needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn);

  /// Fills gradients of every tracked node with d(loss)/d(node). Leaf gradients
  /// accumulate over repeated calls until zero_grad().
  void backward(const Var& loss);
  void zero_grad();

  bool requires_grad(const Var& v) const { return nodes_[v.id_].requires_grad; }
  const Matrix& value_of(const Var& v) const { return nodes_[v.id_].value; }
  Matrix grad_of(const Var& v) const;
  /// grad(v) += delta, for use inside backward functions.
  void accumulate(const Var& v, const Matrix& delta);
  template <class Fn>
  void accumulate_with(const Var& v, Fn&& fn) {
    Node& node = nodes_[v.id_];
    if (!node.requires_grad) return;
    ensure_grad(node);
    fn(node.grad);
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    bool leaf = false;
    BackwardFn backward;
  };

  static void ensure_grad(Node& node);

  std::vector<Node> nodes_;
};

}  // namespace par::num

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "par/hin.hpp"
#include "par/ops.hpp"
#include "par/tape.hpp"

namespace par {

enum class Activation : std::uint8_t { leaky_relu, relu };

/// gated: gated R-GCN. plain: R-GCN with x = phi(u). homogeneous: plain
/// R-GCN with one shared relation transform over the union neighborhood.
enum class EncoderVariant : std::uint8_t { gated, plain, homogeneous };

std::string_view to_string(Activation a);
std::string_view to_string(EncoderVariant v);
std::optional<Activation> parse_activation(std::string_view text);
std::optional<EncoderVariant> parse_variant(std::string_view text);

struct ModelOptions {
  std::size_t d_in = 768;
  std::size_t hidden = 512;
  std::size_t layers = 2;
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.01;
  EncoderVariant variant = EncoderVariant::gated;
};

/// Affine map applied row-wise: x * weight + bias, weight is in x out.
template <class T>
struct LinearT {
  T weight;
  T bias;
};

template <class T>
struct LayerT {
  LinearT<T> self_loop;
  /// One transform per relation, or a single shared one for the homogeneous variant.
  std::vector<LinearT<T>> relation;
  /// Maps [u, x_prev] (2d) to d gate logits. Empty for non-gated variants.
  LinearT<T> gate;
};

template <class T>
struct ModelT {
  LinearT<T> input;
  std::vector<LayerT<T>> layers;
  LinearT<T> liberal_head;
  LinearT<T> conservative_head;
};

/// Calls fn(name, tensor) for every tensor in a fixed order, skipping the
/// gate of non-gated layers.
template <class T, class Fn>
void for_each_tensor(ModelT<T>& m, bool gated, Fn&& fn) {
  auto linear = [&](const std::string& name, LinearT<T>& l) {
    fn(name + ".weight", l.weight);
    fn(name + ".bias", l.bias);
  };
  linear("input", m.input);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    linear(prefix + ".self", m.layers[i].self_loop);
    for (std::size_t r = 0; r < m.layers[i].relation.size(); ++r)
      linear(prefix + ".rel" + std::to_string(r), m.layers[i].relation[r]);
    if (gated) linear(prefix + ".gate", m.layers[i].gate);
  }
  linear("head.liberal", m.liberal_head);
  linear("head.conservative", m.conservative_head);
}

template <class T, class Fn>
void for_each_tensor(const ModelT<T>& m, bool gated, Fn&& fn) {
  for_each_tensor(const_cast<ModelT<T>&>(m), gated,
                  [&](const std::string& name, T& t) { fn(name, static_cast<const T&>(t)); });
}

struct ModelParams {
  ModelOptions options;
  ModelT<Matrix> tensors;

  bool gated() const { return options.variant == EncoderVariant::gated; }
  std::vector<Matrix*> tensor_list();
  std::vector<const Matrix*> tensor_list() const;
  std::size_t parameter_count() const;
};

/// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)), zero biases.
ModelParams init_params(const ModelOptions& options, std::uint64_t seed);

/// Learnable-parameter count implied by the options, without allocating.
std::size_t parameter_count(const ModelOptions& options);

/// Per-relation mean-aggregation groups; nodes with an empty neighborhood under
/// a relation are omitted from that relation.
struct Neighborhoods {
  Index n_nodes = 0;
  std::vector<num::RowIndex> targets;
  std::vector<num::RowGroups> groups;
};

Neighborhoods build_neighborhoods(const Hin& hin, EncoderVariant variant);

struct EncoderOutput {
  Matrix x_final;
  /// Gate activations per layer (empty for non-gated variants).
  std::vector<Matrix> gates;
};

Matrix input_transform(const Matrix& features, const ModelParams& params);
std::pair<Matrix, Matrix> layer_forward(const Matrix& x_prev, const Hin& hin, const ModelParams& params,
                                        std::size_t layer);
EncoderOutput encode(const Hin& hin, const ModelParams& params);
/// Liberal and conservative class distributions for every row.
std::pair<Matrix, Matrix> stance_heads(const Matrix& x_final, const ModelParams& params);

/// Nodes whose representations are the learned actor representations.
std::vector<EntityId> actor_rows(const Hin& hin);

namespace graph {

// Differentiable counterparts used during training.

using BoundModel = ModelT<num::Var>;

BoundModel bind(num::Tape& tape, const ModelParams& params, bool trainable);

num::Var phi(const num::Var& x, const ModelOptions& options);
num::Var linear(const num::Var& x, const LinearT<num::Var>& l);
num::Var input_transform(const num::Var& features, const BoundModel& m, const ModelOptions& options);
/// Returns (x_next, gate); gate is unbound for non-gated variants.
std::pair<num::Var, num::Var> layer_forward(const num::Var& x_prev, const Neighborhoods& hood,
                                            const LayerT<num::Var>& layer, const ModelOptions& options);

struct Encoded {
  num::Var x_final;
  std::vector<num::Var> gates;
};

Encoded encode(const num::Var& features, const Neighborhoods& hood, const BoundModel& m,
               const ModelOptions& options);

struct Heads {
  num::Var liberal_log_prob;
  num::Var conservative_log_prob;
};

Heads stance_log_probs(const num::Var& x_final, const BoundModel& m);

}  // namespace graph

}  // namespace par

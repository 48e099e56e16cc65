#include "par/model.hpp"

#include <cmath>
#include <random>

#include "par/ingest.hpp"

namespace par {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "leaky_relu"; }

std::string_view to_string(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::gated:
      return "gated";
    case EncoderVariant::plain:
      return "plain";
    case EncoderVariant::homogeneous:
      return "homogeneous";
  }
  return {};
}

std::optional<Activation> parse_activation(std::string_view text) {
  if (text == "leaky_relu") return Activation::leaky_relu;
  if (text == "relu") return Activation::relu;
  return std::nullopt;
}

std::optional<EncoderVariant> parse_variant(std::string_view text) {
  if (text == "gated") return EncoderVariant::gated;
  if (text == "plain") return EncoderVariant::plain;
  if (text == "homogeneous") return EncoderVariant::homogeneous;
  return std::nullopt;
}

namespace {

std::size_t relation_slots(EncoderVariant v) { return v == EncoderVariant::homogeneous ? 1 : kNumRelations; }

LinearT<Matrix> make_linear(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LinearT<Matrix> l;
  l.weight.resize(static_cast<Index>(in), static_cast<Index>(out));
  for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = dist(rng);
  l.bias = Matrix::Zero(1, static_cast<Index>(out));
  return l;
}

}  // namespace

std::vector<Matrix*> ModelParams::tensor_list() {
  std::vector<Matrix*> out;
  for_each_tensor(tensors, gated(), [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::vector<const Matrix*> ModelParams::tensor_list() const {
  std::vector<const Matrix*> out;
  for_each_tensor(tensors, gated(), [&](const std::string&, const Matrix& m) { out.push_back(&m); });
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const Matrix* m : tensor_list()) total += static_cast<std::size_t>(m->size());
  return total;
}

std::size_t parameter_count(const ModelOptions& o) {
  const std::size_t d = o.hidden;
  const auto linear = [](std::size_t in, std::size_t out) { return in * out + out; };
  std::size_t per_layer = linear(d, d) * (1 + relation_slots(o.variant));
  if (o.variant == EncoderVariant::gated) per_layer += linear(2 * d, d);
  return linear(o.d_in, d) + o.layers * per_layer + 2 * linear(d, kNumClasses);
}

ModelParams init_params(const ModelOptions& options, std::uint64_t seed) {
  if (options.d_in == 0 || options.hidden == 0) throw num::NumericError("model dimensions must be positive");
  std::mt19937_64 rng(seed);
  const std::size_t d = options.hidden;
  ModelParams p;
  p.options = options;
  auto& t = p.tensors;
  t.input = make_linear(options.d_in, d, rng);
  for (std::size_t l = 0; l < options.layers; ++l) {
    LayerT<Matrix> layer;
    layer.self_loop = make_linear(d, d, rng);
    for (std::size_t r = 0; r < relation_slots(options.variant); ++r) layer.relation.push_back(make_linear(d, d, rng));
    if (options.variant == EncoderVariant::gated) layer.gate = make_linear(2 * d, d, rng);
    t.layers.push_back(std::move(layer));
  }
  t.liberal_head = make_linear(d, kNumClasses, rng);
  t.conservative_head = make_linear(d, kNumClasses, rng);
  return p;
}

Neighborhoods build_neighborhoods(const Hin& hin, EncoderVariant variant) {
  Neighborhoods hood;
  hood.n_nodes = static_cast<Index>(hin.node_count());
  if (variant == EncoderVariant::homogeneous) {
    hood.targets.resize(1);
    hood.groups.resize(1);
    for (EntityId i = 0; i < hin.node_count(); ++i) {
      const auto pos = hin.positive_set(i);
      if (pos.empty()) continue;
      hood.targets[0].push_back(static_cast<Index>(i));
      hood.groups[0].emplace_back(pos.begin(), pos.end());
    }
    return hood;
  }
  hood.targets.resize(kNumRelations);
  hood.groups.resize(kNumRelations);
  for (RelationKind rel : kAllRelations) {
    const std::size_t r = index_of(rel);
    for (EntityId i = 0; i < hin.node_count(); ++i) {
      const auto nb = hin.neighbors(i, rel);
      if (nb.empty()) continue;
      hood.targets[r].push_back(static_cast<Index>(i));
      hood.groups[r].emplace_back(nb.begin(), nb.end());
    }
  }
  return hood;
}

std::vector<EntityId> actor_rows(const Hin& hin) {
  std::vector<EntityId> out;
  for (EntityId i = 0; i < hin.node_count(); ++i)
    if (is_political_actor(hin.node(i).kind)) out.push_back(i);
  return out;
}

namespace graph {

BoundModel bind(num::Tape& tape, const ModelParams& params, bool trainable) {
  const auto leaf = [&](const Matrix& m) { return trainable ? tape.parameter(m) : tape.constant(m); };
  const auto lin = [&](const LinearT<Matrix>& l) { return LinearT<num::Var>{leaf(l.weight), leaf(l.bias)}; };
  const auto& t = params.tensors;
  BoundModel m;
  // Same order as for_each_tensor, so tape ids line up with tensor_list().
  m.input = lin(t.input);
  for (const auto& layer : t.layers) {
    LayerT<num::Var> bound;
    bound.self_loop = lin(layer.self_loop);
    for (const auto& rel : layer.relation) bound.relation.push_back(lin(rel));
    if (params.gated()) bound.gate = lin(layer.gate);
    m.layers.push_back(std::move(bound));
  }
  m.liberal_head = lin(t.liberal_head);
  m.conservative_head = lin(t.conservative_head);
  return m;
}

num::Var phi(const num::Var& x, const ModelOptions& options) {
  return options.activation == Activation::relu ? num::relu(x) : num::leaky_relu(x, options.leaky_slope);
}

num::Var linear(const num::Var& x, const LinearT<num::Var>& l) { return num::add_bias(num::matmul(x, l.weight), l.bias); }

num::Var input_transform(const num::Var& features, const BoundModel& m, const ModelOptions& options) {
  return phi(linear(features, m.input), options);
}

std::pair<num::Var, num::Var> layer_forward(const num::Var& x_prev, const Neighborhoods& hood,
                                            const LayerT<num::Var>& layer, const ModelOptions& options) {
  // Mean aggregation commutes with the affine map: mean_j f(x_j) = f(mean_j x_j).
  num::Var u = linear(x_prev, layer.self_loop);
  for (std::size_t r = 0; r < layer.relation.size(); ++r) {
    if (hood.targets[r].empty()) continue;
    num::Var pooled = num::mean_rows(x_prev, hood.groups[r]);
    num::Var message = linear(pooled, layer.relation[r]);
    u = num::add(u, num::scatter_rows(message, hood.targets[r], hood.n_nodes));
  }
  if (options.variant != EncoderVariant::gated) return {phi(u, options), num::Var{}};

  num::Var gate = num::sigmoid(linear(num::concat_cols(u, x_prev), layer.gate));
  num::Var keep = num::add_scalar(num::negate(gate), 1.0);
  num::Var next = num::add(num::hadamard(num::tanh(u), gate), num::hadamard(x_prev, keep));
  return {next, gate};
}

Encoded encode(const num::Var& features, const Neighborhoods& hood, const BoundModel& m,
               const ModelOptions& options) {
  Encoded out;
  out.x_final = input_transform(features, m, options);
  for (const auto& layer : m.layers) {
    auto [next, gate] = layer_forward(out.x_final, hood, layer, options);
    out.x_final = next;
    if (gate.valid()) out.gates.push_back(gate);
  }
  return out;
}

Heads stance_log_probs(const num::Var& x_final, const BoundModel& m) {
  return {num::row_log_softmax(linear(x_final, m.liberal_head)),
          num::row_log_softmax(linear(x_final, m.conservative_head))};
}

}  // namespace graph

Matrix input_transform(const Matrix& features, const ModelParams& params) {
  if (static_cast<std::size_t>(features.cols()) != params.options.d_in)
    throw num::NumericError("feature dimension " + std::to_string(features.cols()) + " does not match d_in " +
                            std::to_string(params.options.d_in));
  num::Tape tape;
  auto m = graph::bind(tape, params, false);
  return graph::input_transform(tape.constant(features), m, params.options).value();
}

std::pair<Matrix, Matrix> layer_forward(const Matrix& x_prev, const Hin& hin, const ModelParams& params,
                                        std::size_t layer) {
  if (layer >= params.tensors.layers.size()) throw num::NumericError("layer index out of range");
  num::Tape tape;
  auto m = graph::bind(tape, params, false);
  const auto hood = build_neighborhoods(hin, params.options.variant);
  auto [next, gate] = graph::layer_forward(tape.constant(x_prev), hood, m.layers[layer], params.options);
  return {next.value(), gate.valid() ? gate.value() : Matrix{}};
}

EncoderOutput encode(const Hin& hin, const ModelParams& params) {
  if (hin.feature_dim() != params.options.d_in)
    throw num::NumericError("graph features have dimension " + std::to_string(hin.feature_dim()) +
                            " but the model expects " + std::to_string(params.options.d_in));
  num::Tape tape;
  auto m = graph::bind(tape, params, false);
  const auto hood = build_neighborhoods(hin, params.options.variant);
  auto enc = graph::encode(tape.constant(hin.features()), hood, m, params.options);
  EncoderOutput out;
  out.x_final = enc.x_final.value();
  for (const auto& g : enc.gates) out.gates.push_back(g.value());
  return out;
}

std::pair<Matrix, Matrix> stance_heads(const Matrix& x_final, const ModelParams& params) {
  num::Tape tape;
  auto m = graph::bind(tape, params, false);
  num::Var x = tape.constant(x_final);
  return {num::row_softmax(graph::linear(x, m.liberal_head)).value(),
          num::row_softmax(graph::linear(x, m.conservative_head)).value()};
}

}  // namespace par

#include "gradcheck_fixture.hpp"

#include <random>

#include "par/ingest.hpp"
#include "par/objectives.hpp"

namespace par::cli {

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradCheckFixture f;
  Hin& hin = f.hin;
  std::vector<EntityId> actors, parties, states, terms;
  for (int i = 0; i < 4; ++i) actors.push_back(hin.add_node(NodeKind::legislator, "L" + std::to_string(i)));
  for (int i = 0; i < 2; ++i) parties.push_back(hin.add_node(NodeKind::party, "P" + std::to_string(i)));
  for (int i = 0; i < 2; ++i) states.push_back(hin.add_node(NodeKind::state, "S" + std::to_string(i)));
  for (int i = 0; i < 2; ++i) terms.push_back(hin.add_node(NodeKind::office_term, "T" + std::to_string(i)));

  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
  for (EntityId a : actors) {
    hin.add_edge(a, parties[coin(rng)], RelationKind::party_affiliation);
    hin.add_edge(a, states[coin(rng)], RelationKind::home_state);
    const int t = coin(rng);
    hin.add_edge(a, terms[t], RelationKind::time_in_office);
    if (coin(rng)) hin.add_edge(a, terms[1 - t], RelationKind::time_in_office);
    f.labels.push_back({a, Side::liberal, cls(rng)});
    f.labels.push_back({a, Side::conservative, cls(rng)});
    f.consistency_entities.push_back(a);
  }
  hin.set_features(synth_features(hin.node_count(), 4, seed));

  ModelOptions options;
  options.d_in = 4;
  options.hidden = 3;
  options.layers = 2;
  f.params = init_params(options, seed);
  // Nonzero biases so every bias gradient is exercised away from the origin.
  std::normal_distribution<double> normal(0.0, 0.1);
  for_each_tensor(f.params.tensors, f.params.gated(), [&](const std::string& name, Matrix& m) {
    if (name.ends_with(".bias"))
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  });
  return f;
}

num::GradCheckResult model_gradcheck(std::uint64_t seed) {
  const GradCheckFixture f = make_gradcheck_fixture(seed);
  const ModelOptions& options = f.params.options;
  const Neighborhoods hood = build_neighborhoods(f.hin, options.variant);

  std::vector<Matrix> initial;
  for_each_tensor(f.params.tensors, f.params.gated(), [&](const std::string&, const Matrix& m) { initial.push_back(m); });

  LossWeights weights;
  weights.expert = 1.0;
  weights.consistency = 1.0;
  weights.echo = 1.0;
  weights.l2 = 1e-3;
  EchoOptions echo{weights.negative_weight, weights.negatives_per_anchor, seed, 0};

  const num::LossFn loss = [&](num::Tape& tape, std::span<const num::Var> vars) {
    // Same tensor layout as the fixture's parameters, filled from the bound leaves.
    graph::BoundModel m;
    m.layers.resize(options.layers);
    for (auto& layer : m.layers) layer.relation.resize(f.params.tensors.layers[0].relation.size());
    std::size_t next = 0;
    for_each_tensor(m, f.params.gated(), [&](const std::string&, num::Var& v) { v = vars[next++]; });

    const auto enc = graph::encode(tape.constant(f.hin.features()), hood, m, options);
    const auto heads = graph::stance_log_probs(enc.x_final, m);
    LossTerms terms;
    terms.expert = expert_loss(heads.liberal_log_prob, heads.conservative_log_prob, f.labels);
    terms.consistency = consistency_loss(heads.liberal_log_prob, heads.conservative_log_prob, f.consistency_entities);
    terms.echo = echo_loss(enc.x_final, f.hin, echo);
    return total_loss(tape, terms, weights, vars).loss;
  };
  return num::grad_check(loss, initial, 1e-5);
}

}  // namespace par::cli

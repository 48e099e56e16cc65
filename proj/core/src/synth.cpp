#include "par/synth.hpp"

#include <cmath>
#include <random>
#include <string>

namespace par {

namespace {

// Interior of each stance band, so 1 - s lands inside the mirrored band.
constexpr double kBandLow[kNumClasses] = {0.01, 0.11, 0.26, 0.76, 0.91};
constexpr double kBandHigh[kNumClasses] = {0.09, 0.24, 0.74, 0.89, 0.99};

int community_class(std::size_t community, std::size_t n_communities) {
  return static_cast<int>(std::lround(4.0 * static_cast<double>(community) / static_cast<double>(n_communities - 1)));
}

}  // namespace

SynthGraph synth_hin(const SynthOptions& o) {
  if (o.n_communities < 2) throw IngestError("synth_hin needs at least 2 communities");
  if (!(o.flip_prob >= 0.0 && o.flip_prob < 0.5)) throw IngestError("flip_prob must lie in [0, 0.5)");
  if (o.n_actors < o.n_communities) throw IngestError("synth_hin needs at least one actor per community");
  if (o.d_in == 0) throw IngestError("synth_hin needs d_in >= 1");

  std::mt19937_64 rng(o.seed);
  SynthGraph out;
  Hin& hin = out.hin;

  std::vector<EntityId> parties, institutions, states, terms, actors;
  for (std::size_t c = 0; c < o.n_communities; ++c) {
    parties.push_back(hin.add_node(NodeKind::party, "Party " + std::to_string(c)));
    institutions.push_back(hin.add_node(NodeKind::institution, "Institution " + std::to_string(c)));
  }
  const std::size_t n_states = std::max<std::size_t>(1, o.n_context / 2);
  const std::size_t n_terms = std::max<std::size_t>(1, o.n_context - std::min(o.n_context, n_states));
  for (std::size_t s = 0; s < n_states; ++s) states.push_back(hin.add_node(NodeKind::state, "State " + std::to_string(s)));
  for (std::size_t t = 0; t < n_terms; ++t)
    terms.push_back(hin.add_node(NodeKind::office_term, "Term " + std::to_string(t)));
  out.community.assign(hin.node_count(), -1);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_state(0, n_states - 1);
  std::uniform_int_distribution<std::size_t> pick_term(0, n_terms - 1);
  std::uniform_int_distribution<std::size_t> pick_other(1, o.n_communities - 1);

  for (std::size_t i = 0; i < o.n_actors; ++i) {
    const std::size_t c = i % o.n_communities;
    const EntityId a = hin.add_node(NodeKind::legislator, "Legislator " + std::to_string(i));
    actors.push_back(a);
    out.community.push_back(static_cast<int>(c));
    hin.add_edge(a, parties[c], RelationKind::party_affiliation);
    if (unit(rng) < o.institution_rate) hin.add_edge(a, institutions[c], RelationKind::hold_office);
    hin.add_edge(a, states[pick_state(rng)], RelationKind::home_state);
    hin.add_edge(a, terms[pick_term(rng)], RelationKind::time_in_office);

    const auto draw = [&](std::size_t community) {
      const int k = community_class(community, o.n_communities);
      return kBandLow[k] + (kBandHigh[k] - kBandLow[k]) * unit(rng);
    };
    const double clean = draw(c);
    double liberal = clean;
    if (unit(rng) < o.flip_prob) liberal = draw((c + pick_other(rng)) % o.n_communities);
    out.scores.push_back({a, Side::liberal, liberal, ""});
    out.scores.push_back({a, Side::conservative, 1.0 - clean, ""});
  }

  Matrix features(static_cast<Index>(hin.node_count()), static_cast<Index>(o.d_in));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = 0; r < features.rows(); ++r) {
    const int c = out.community[static_cast<std::size_t>(r)];
    for (Index d = 0; d < features.cols(); ++d) {
      double v = normal(rng);
      if (c >= 0 && static_cast<std::size_t>(d) % o.n_communities == static_cast<std::size_t>(c)) v += o.feature_signal;
      features(r, d) = v;
    }
  }
  hin.set_features(std::move(features));
  return out;
}

}  // namespace par

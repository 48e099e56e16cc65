#pragma once

#include <cstdint>
#include <vector>

#include "par/hin.hpp"
#include "par/ingest.hpp"

namespace par {

/// Planted-partition fixture parameters.
struct SynthOptions {
  std::size_t n_actors = 200;
  /// State plus office-term context nodes, shared across communities.
  std::size_t n_context = 20;
  std::size_t d_in = 32;
  std::size_t n_communities = 2;
  /// Probability that an actor's liberal score is drawn from another community's band.
  double flip_prob = 0.05;
  std::uint64_t seed = 0;

  /// Shift added to the community's block of feature coordinates.
  double feature_signal = 0.2;
  /// Probability that an actor also holds its community's institution.
  double institution_rate = 0.4;
};

struct SynthGraph {
  Hin hin;
  std::vector<ExpertScore> scores;
  /// Planted community per node; -1 for hubs and context nodes.
  std::vector<int> community;
};

/// Actors (legislators) split evenly over communities. Each community owns a
/// party hub (every member joins it) and an institution hub (members join
/// with institution_rate). Every actor gets one random state and one random
/// office term. Conservative scores are 1 minus the liberal score before the
/// flip noise is applied.
SynthGraph synth_hin(const SynthOptions& options);

}  // namespace par

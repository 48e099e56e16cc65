#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "par/hin.hpp"
#include "par/ingest.hpp"
#include "par/tape.hpp"

namespace par {

class LossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossWeights {
  double expert = 0.01;       // lambda_1
  double consistency = 0.2;   // lambda_2
  double echo = 1.0;          // lambda_3
  double l2 = 1e-5;           // lambda_4
  /// Weight on the negative-sample term; negative values penalise similar non-neighbours.
  double negative_weight = -0.1;
  std::size_t negatives_per_anchor = 2;
};

struct LossReport {
  double expert = 0.0;
  double consistency = 0.0;
  double echo = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

/// Which objectives take part; a disabled term is neither computed nor weighted.
struct LossSelection {
  bool expert = true;
  bool consistency = true;
  bool echo = true;
};

/// Opposite stance class: k -> (kNumClasses - 1) - k.
constexpr int reverse_class(int k) { return (kNumClasses - 1) - k; }

/// Row-wise argmax, ties to the lower index.
std::vector<int> row_argmax(const Matrix& m);

/// Derived consistency targets: liberal target of row i is the reversal of
/// argmax(conservative_i) and vice versa.
struct ConsistencyTargets {
  std::vector<int> liberal;
  std::vector<int> conservative;
};

ConsistencyTargets consistency_labels(const Matrix& liberal, const Matrix& conservative);

/// Summed cross-entropy over labels; inputs are row-wise log-probabilities.
num::Var expert_loss(const num::Var& liberal_log_prob, const num::Var& conservative_log_prob,
                     std::span<const ExpertLabel> labels);

/// Cross-entropy of each distribution against the reversed argmax of the
/// other, summed over `entities`. Targets are constants.
num::Var consistency_loss(const num::Var& liberal_log_prob, const num::Var& conservative_log_prob,
                          std::span<const EntityId> entities);

/// Up to k distinct non-neighbours of the anchor, seeded by (seed, epoch, anchor).
/// nullopt when the anchor is adjacent to every other node.
std::optional<std::vector<EntityId>> sample_negatives(const Hin& hin, EntityId anchor, std::size_t k,
                                                      std::uint64_t seed, std::uint64_t epoch = 0);

struct EchoOptions {
  double negative_weight = -0.1;
  std::size_t negatives_per_anchor = 2;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
};

/// -sum_i sum_{j in P_i} log sigmoid(x_i.x_j) + Q * sum_i sum_{j sampled} log sigmoid(-x_i.x_j)
/// over the given anchors.
num::Var echo_loss(const num::Var& x_final, const Hin& hin, std::span<const EntityId> anchors,
                   const EchoOptions& options);
/// Every node as an anchor.
num::Var echo_loss(const num::Var& x_final, const Hin& hin, const EchoOptions& options);

struct LossTerms {
  num::Var expert;
  num::Var consistency;
  num::Var echo;
};

struct TotalLoss {
  num::Var loss;
  LossReport report;
};

/// Weighted sum plus lambda_4 times the squared norm of every parameter.
/// Unbound terms count as zero.
TotalLoss total_loss(num::Tape& tape, const LossTerms& terms, const LossWeights& weights,
                     std::span<const num::Var> params);

}  // namespace par

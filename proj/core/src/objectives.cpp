#include "par/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "par/ops.hpp"

namespace par {

std::vector<int> row_argmax(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < m.cols(); ++c)
      if (m(r, c) > m(r, best)) best = c;
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

ConsistencyTargets consistency_labels(const Matrix& liberal, const Matrix& conservative) {
  ConsistencyTargets t;
  t.liberal = row_argmax(conservative);
  t.conservative = row_argmax(liberal);
  for (int& k : t.liberal) k = reverse_class(k);
  for (int& k : t.conservative) k = reverse_class(k);
  return t;
}

num::Var expert_loss(const num::Var& liberal_log_prob, const num::Var& conservative_log_prob,
                     std::span<const ExpertLabel> labels) {
  num::Tape& tape = *liberal_log_prob.tape();
  if (labels.empty()) {
    spdlog::warn("expert loss: empty label set, contributing 0");
    return tape.constant(0.0);
  }
  num::RowIndex rows[2], cols[2];
  for (const auto& l : labels) {
    if (l.label < 0 || l.label >= kNumClasses) throw LossError("expert loss: class outside 0..4");
    rows[index_of(l.side)].push_back(static_cast<Index>(l.entity));
    cols[index_of(l.side)].push_back(l.label);
  }
  num::Var total = tape.constant(0.0);
  const num::Var* log_probs[2] = {&liberal_log_prob, &conservative_log_prob};
  for (std::size_t s = 0; s < 2; ++s) {
    if (rows[s].empty()) continue;
    total = num::add(total, num::negate(num::sum(num::gather_entries(*log_probs[s], rows[s], cols[s]))));
  }
  return total;
}

num::Var consistency_loss(const num::Var& liberal_log_prob, const num::Var& conservative_log_prob,
                          std::span<const EntityId> entities) {
  num::Tape& tape = *liberal_log_prob.tape();
  if (entities.empty()) {
    spdlog::warn("consistency loss: no entity carries both labels, contributing 0");
    return tape.constant(0.0);
  }
  const Matrix& lib = liberal_log_prob.value();
  const Matrix& con = conservative_log_prob.value();
  num::RowIndex rows;
  num::RowIndex lib_cols, con_cols;
  for (EntityId e : entities) {
    const auto r = static_cast<Index>(e);
    if (r >= lib.rows()) throw LossError("consistency loss: entity out of range");
    Index lib_arg = 0, con_arg = 0;
    for (Index c = 1; c < lib.cols(); ++c) {
      if (lib(r, c) > lib(r, lib_arg)) lib_arg = c;
      if (con(r, c) > con(r, con_arg)) con_arg = c;
    }
    rows.push_back(r);
    lib_cols.push_back(reverse_class(static_cast<int>(con_arg)));
    con_cols.push_back(reverse_class(static_cast<int>(lib_arg)));
  }
  num::Var lib_term = num::sum(num::gather_entries(liberal_log_prob, rows, lib_cols));
  num::Var con_term = num::sum(num::gather_entries(conservative_log_prob, rows, con_cols));
  return num::negate(num::add(lib_term, con_term));
}

std::optional<std::vector<EntityId>> sample_negatives(const Hin& hin, EntityId anchor, std::size_t k,
                                                      std::uint64_t seed, std::uint64_t epoch) {
  std::vector<EntityId> pool = hin.negative_set(anchor);
  if (pool.empty()) return std::nullopt;
  if (pool.size() <= k) return pool;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(anchor),
                    static_cast<std::uint32_t>(anchor >> 32)};
  std::mt19937_64 rng(seq);
  // Partial Fisher-Yates: the first k slots become the sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

num::Var echo_loss(const num::Var& x_final, const Hin& hin, std::span<const EntityId> anchors,
                   const EchoOptions& options) {
  num::Tape& tape = *x_final.tape();
  if (static_cast<std::size_t>(x_final.rows()) != hin.node_count())
    throw LossError("echo loss: representation rows do not match the graph");
  std::vector<num::RowPair> positives, negatives;
  std::size_t skipped = 0;
  for (EntityId i : anchors) {
    for (EntityId j : hin.positive_set(i)) positives.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
    if (options.negatives_per_anchor == 0 || options.negative_weight == 0.0) continue;
    auto sample = sample_negatives(hin, i, options.negatives_per_anchor, options.seed, options.epoch);
    if (!sample) {
      ++skipped;
      continue;
    }
    for (EntityId j : *sample) negatives.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
  }
  if (skipped > 0) spdlog::warn("echo loss: {} anchor(s) adjacent to every node, no negatives drawn", skipped);

  num::Var total = tape.constant(0.0);
  if (!positives.empty())
    total = num::negate(num::sum(num::log_sigmoid(num::row_pair_dot(x_final, positives))));
  if (!negatives.empty()) {
    num::Var neg = num::sum(num::log_sigmoid(num::negate(num::row_pair_dot(x_final, negatives))));
    total = num::add(total, num::scale(neg, options.negative_weight));
  }
  return total;
}

num::Var echo_loss(const num::Var& x_final, const Hin& hin, const EchoOptions& options) {
  std::vector<EntityId> all(hin.node_count());
  for (EntityId i = 0; i < all.size(); ++i) all[i] = i;
  return echo_loss(x_final, hin, all, options);
}

TotalLoss total_loss(num::Tape& tape, const LossTerms& terms, const LossWeights& weights,
                     std::span<const num::Var> params) {
  if (weights.expert < 0 || weights.consistency < 0 || weights.echo < 0 || weights.l2 < 0)
    throw LossError("loss weights must be nonnegative");
  TotalLoss out;
  num::Var total = tape.constant(0.0);
  const auto add_term = [&](const num::Var& term, double weight, double& slot, const char* name) {
    if (!term.valid()) return;
    slot = term.scalar();
    if (!std::isfinite(slot)) throw LossError(std::string("non-finite ") + name + " loss");
    if (weight != 0.0) total = num::add(total, num::scale(term, weight));
  };
  add_term(terms.expert, weights.expert, out.report.expert, "expert");
  add_term(terms.consistency, weights.consistency, out.report.consistency, "consistency");
  add_term(terms.echo, weights.echo, out.report.echo, "echo");
  if (!params.empty()) {
    num::Var reg = tape.constant(0.0);
    for (const num::Var& p : params) reg = num::add(reg, num::squared_norm(p));
    out.report.l2 = reg.scalar();
    if (weights.l2 != 0.0) total = num::add(total, num::scale(reg, weights.l2));
  }
  out.report.total = total.scalar();
  if (!std::isfinite(out.report.total)) throw LossError("non-finite total loss");
  out.loss = total;
  return out;
}

}  // namespace par

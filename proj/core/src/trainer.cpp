#include "par/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "par/adam.hpp"
#include "par/checkpoint.hpp"
#include "par/csv.hpp"

namespace par {

LossWeights table8_weights() { return LossWeights{}; }

LossWeights appendix_b3_weights() {
  LossWeights w;
  w.expert = 1.0;
  w.consistency = 0.2;
  w.echo = 0.1;
  w.l2 = 1e-5;
  return w;
}

namespace {

const std::vector<ExpertLabel>& part_of(const SideSplit& s, SplitPart part) {
  switch (part) {
    case SplitPart::train:
      return s.train;
    case SplitPart::validation:
      return s.validation;
    case SplitPart::test:
      return s.test;
  }
  return s.test;
}

template <class Fn>
auto named_term(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const num::NumericError& e) {
    throw TrainError(std::string(name) + " loss: " + e.what());
  }
}

LossReport& operator+=(LossReport& a, const LossReport& b) {
  a.expert += b.expert;
  a.consistency += b.consistency;
  a.echo += b.echo;
  a.l2 += b.l2;
  a.total += b.total;
  return a;
}

LossReport scaled(LossReport r, double f) {
  r.expert *= f;
  r.consistency *= f;
  r.echo *= f;
  r.l2 *= f;
  r.total *= f;
  return r;
}

}  // namespace

MetricsReport evaluate_heads(const Matrix& liberal, const Matrix& conservative, std::span<const ExpertLabel> liberal_labels,
                             std::span<const ExpertLabel> conservative_labels) {
  if (liberal_labels.empty() || conservative_labels.empty()) throw TrainError("evaluate: a side has no labels");
  const auto score = [](const Matrix& probs, std::span<const ExpertLabel> labels) {
    const auto pred = row_argmax(probs);
    std::vector<int> p, g;
    for (const auto& l : labels) {
      p.push_back(pred.at(l.entity));
      g.push_back(l.label);
    }
    return metrics(p, g);
  };
  MetricsReport r;
  r.liberal = score(liberal, liberal_labels);
  r.conservative = score(conservative, conservative_labels);
  r.combined = harmonic_combine(r.liberal, r.conservative);
  return r;
}

MetricsReport evaluate(const ModelParams& params, const Hin& hin, const SplitAssignment& split, SplitPart part) {
  const auto enc = encode(hin, params);
  const auto [lib, con] = stance_heads(enc.x_final, params);
  return evaluate_heads(lib, con, part_of(split[Side::liberal], part), part_of(split[Side::conservative], part));
}

TrainResult train(const Hin& hin, const SplitAssignment& split, const TrainConfig& config) {
  if (!(config.learning_rate > 0) || config.max_epochs == 0 || config.batch_size == 0)
    throw TrainError("learning rate, epochs and batch size must be positive");
  if (!hin.has_features()) throw TrainError("graph has no node features");
  if (!validate(hin).empty()) throw TrainError("graph fails schema validation");

  ModelOptions options = config.model;
  options.d_in = hin.feature_dim();
  TrainResult result{init_params(options, config.seed), {}};
  ModelParams& params = result.params;
  TrainHistory& history = result.history;
  spdlog::info("model: {} variant, {} layers, hidden {}, {} parameters", to_string(options.variant), options.layers,
               options.hidden, params.parameter_count());

  const Neighborhoods hood = build_neighborhoods(hin, options.variant);

  // Training labels grouped by entity; an epoch is one pass over these entities.
  std::map<EntityId, std::vector<ExpertLabel>> by_entity;
  for (Side side : kSides)
    for (const auto& l : split[side].train) by_entity[l.entity].push_back(l);
  std::vector<EntityId> entities;
  for (const auto& [e, ls] : by_entity) entities.push_back(e);
  if (entities.empty()) throw TrainError("no training labels");

  std::set<EntityId> both;
  {
    std::set<EntityId> sides[2];
    for (Side side : kSides) {
      const auto& s = split[side];
      for (const auto& l : s.train) sides[index_of(side)].insert(l.entity);
      if (config.consistency_on_all_labeled) {
        for (const auto& l : s.validation) sides[index_of(side)].insert(l.entity);
        for (const auto& l : s.test) sides[index_of(side)].insert(l.entity);
      }
    }
    std::set_intersection(sides[0].begin(), sides[0].end(), sides[1].begin(), sides[1].end(),
                          std::inserter(both, both.end()));
  }
  // Held-out entities in the consistency set are spread over the epoch's batches.
  std::vector<EntityId> heldout_consistency;
  for (EntityId e : both)
    if (!by_entity.contains(e)) heldout_consistency.push_back(e);

  std::vector<EntityId> all_nodes(hin.node_count());
  std::iota(all_nodes.begin(), all_nodes.end(), 0);

  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  num::AdamState adam;
  std::vector<Matrix*> tensors = params.tensor_list();
  ModelParams best = params;
  history.best_validation = -1.0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(entities.begin(), entities.end(), rng);
    const std::size_t n_steps = (entities.size() + config.batch_size - 1) / config.batch_size;
    LossReport epoch_loss;

    for (std::size_t step = 0; step < n_steps; ++step) {
      const auto first = entities.begin() + static_cast<std::ptrdiff_t>(step * config.batch_size);
      const auto last = entities.begin() + static_cast<std::ptrdiff_t>(std::min(entities.size(), (step + 1) * config.batch_size));
      std::vector<ExpertLabel> batch_labels;
      std::vector<EntityId> batch_consistency;
      for (auto it = first; it != last; ++it) {
        const auto& ls = by_entity[*it];
        batch_labels.insert(batch_labels.end(), ls.begin(), ls.end());
        if (both.contains(*it)) batch_consistency.push_back(*it);
      }
      for (std::size_t k = step; k < heldout_consistency.size(); k += n_steps)
        batch_consistency.push_back(heldout_consistency[k]);

      num::Tape tape;
      const auto bound = graph::bind(tape, params, true);
      std::vector<num::Var> param_vars;
      for_each_tensor(bound, params.gated(), [&](const std::string&, const num::Var& v) { param_vars.push_back(v); });

      const num::Var features = tape.constant(hin.features());
      const auto enc = named_term("encoder", [&] {
        return graph::encode(features, hood, bound, options).x_final;
      });
      LossTerms terms;
      if (config.losses.expert || config.losses.consistency) {
        const auto heads = named_term("stance head", [&] { return graph::stance_log_probs(enc, bound); });
        const auto& lib = heads.liberal_log_prob;
        const auto& con = heads.conservative_log_prob;
        if (config.losses.expert)
          terms.expert = named_term("expert", [&] { return expert_loss(lib, con, batch_labels); });
        if (config.losses.consistency)
          terms.consistency = named_term("consistency", [&] { return consistency_loss(lib, con, batch_consistency); });
      }
      if (config.losses.echo) {
        std::vector<EntityId> anchors = all_nodes;
        std::shuffle(anchors.begin(), anchors.end(), rng);
        anchors.resize(std::min(anchors.size(), config.batch_size));
        std::sort(anchors.begin(), anchors.end());
        EchoOptions echo{config.weights.negative_weight, config.weights.negatives_per_anchor, config.seed, epoch};
        terms.echo = named_term("echo", [&] { return echo_loss(enc, hin, anchors, echo); });
      }
      TotalLoss total;
      try {
        total = total_loss(tape, terms, config.weights, param_vars);
      } catch (const std::exception& e) {
        throw TrainError(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
      }

      tape.backward(total.loss);
      std::vector<Matrix> grads;
      grads.reserve(param_vars.size());
      for (const auto& v : param_vars) grads.push_back(v.grad());
      num::adam_step(tensors, grads, adam, config.learning_rate);

      history.steps.push_back({epoch, step, total.report});
      epoch_loss += total.report;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = scaled(epoch_loss, 1.0 / static_cast<double>(n_steps));
    const auto val = evaluate(params, hin, split, SplitPart::validation);
    record.validation_liberal = val.liberal.accuracy;
    record.validation_conservative = val.conservative.accuracy;
    record.validation_combined = val.combined.accuracy;
    history.epochs.push_back(record);
    spdlog::debug("epoch {}: loss {:.6f} validation {:.4f}", epoch, record.loss.total, record.validation_combined);

    if (record.validation_combined > history.best_validation) {
      history.best_validation = record.validation_combined;
      history.best_epoch = epoch;
      best = params;
      if (config.checkpoint_dir) {
        const auto name = "epoch-" + std::to_string(epoch);
        save_checkpoint(best, *config.checkpoint_dir / name);
        std::ofstream marker(*config.checkpoint_dir / "best");
        marker << name << '\n';
      }
    } else if (config.patience > 0 && epoch - history.best_epoch >= config.patience) {
      break;
    }
  }

  params = std::move(best);
  return result;
}

void write_training_log(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw TrainError("cannot write " + path.string());
  csv::write_row(out, {"epoch", "step", "L1", "L2", "L3", "reg", "total"});
  for (const auto& s : history.steps)
    csv::write_row(out, {std::to_string(s.epoch), std::to_string(s.step), csv::format_double(s.loss.expert),
                         csv::format_double(s.loss.consistency), csv::format_double(s.loss.echo),
                         csv::format_double(s.loss.l2), csv::format_double(s.loss.total)});
}

}  // namespace par

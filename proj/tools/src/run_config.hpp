#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "par/ingest.hpp"
#include "par/synth.hpp"
#include "par/trainer.hpp"
#include "par/vote.hpp"

namespace par::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every setting a command can read. Loaded from `key = value` files and
/// command-line overrides; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";

  // Inputs.
  std::string nodes;
  std::string edges;
  /// A CSV path or "synthetic:<seed>"; empty means no features.
  std::string features;
  std::size_t feature_dim = 768;
  std::string scores;
  std::string checkpoint;
  std::string embeddings;
  std::string votes;
  std::string bills;
  std::string vote_model;
  TermMode term_mode = TermMode::latest;
  SplitRatios split;

  // Training.
  std::string preset = "table8";
  TrainConfig train;

  // Evaluation and analysis.
  SplitPart eval_part = SplitPart::test;
  /// kind or stance.
  std::string project_group = "kind";

  // Ablations.
  std::vector<RelationKind> ablate_relations{kAllRelations.begin(), kAllRelations.end()};

  // Synthetic data.
  SynthOptions synth;
  bool synth_votes = false;
  vote::PlantedOptions planted;

  // Vote prediction.
  vote::VoteConfig vote;
  vote::SplitMode vote_split = vote::SplitMode::random;

  /// Applies one setting. Lambda keys always win over the preset regardless of order.
  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; `#` starts a comment.
  void load_file(const std::filesystem::path& path);
  /// Every key with its resolved value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> resolved() const;
  void write_resolved(const std::filesystem::path& path) const;

  /// Seeds every component from `seed`.
  void apply_seed();

  /// Explicit loss-weight settings, re-applied whenever the preset changes.
  std::vector<std::pair<std::string, std::string>> weight_overrides;
};

std::vector<std::string> config_keys();

}  // namespace par::cli

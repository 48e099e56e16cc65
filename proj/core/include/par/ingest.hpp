#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "par/hin.hpp"

namespace par {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Liberal scores come from AFL-CIO, conservative scores from Heritage Action.
enum class Side : std::uint8_t { liberal, conservative };

inline constexpr std::array<Side, 2> kSides = {Side::liberal, Side::conservative};
inline constexpr int kNumClasses = 5;

std::string_view to_string(Side side);
std::optional<Side> parse_side(std::string_view text);
inline std::size_t index_of(Side side) { return static_cast<std::size_t>(side); }

struct ExpertScore {
  EntityId entity = 0;
  Side side = Side::liberal;
  double score = 0.0;
  std::string term;
};

/// Ordinal stance class: 0 strongly oppose, 1 oppose, 2 neutral, 3 favor, 4 strongly favor.
struct ExpertLabel {
  EntityId entity = 0;
  Side side = Side::liberal;
  int label = 0;

  friend bool operator==(const ExpertLabel&, const ExpertLabel&) = default;
};

struct SideSplit {
  std::vector<ExpertLabel> train;
  std::vector<ExpertLabel> validation;
  std::vector<ExpertLabel> test;
};

struct SplitAssignment {
  std::array<SideSplit, 2> sides;

  SideSplit& operator[](Side side) { return sides[index_of(side)]; }
  const SideSplit& operator[](Side side) const { return sides[index_of(side)]; }
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.2;
  double test = 0.1;
};

/// How several term-level scores for one (entity, side) become labels.
enum class TermMode { latest, expand };

/// Where node features come from: a CSV file or a seeded standard-normal draw.
struct FeatureSource {
  std::optional<std::filesystem::path> path;
  std::uint64_t synthetic_seed = 0;
  std::size_t synthetic_dim = 0;

  /// Accepts a path or the token "synthetic:<seed>".
  static FeatureSource parse(const std::string& spec, std::size_t synthetic_dim);
};

/// Reads the nodes file (id,kind,name), edges file (src,dst,relation) and features.
Hin load_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
               const FeatureSource& features);

Matrix load_features(const std::filesystem::path& path, std::size_t n_nodes);

/// Reads entity_id,side,score,term rows.
std::vector<ExpertScore> load_scores(const std::filesystem::path& path, const Hin& hin);

void write_graph(const Hin& hin, const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& features_path);
void write_scores(const std::vector<ExpertScore>& scores, const std::filesystem::path& path);

/// Band index of a think-tank score, boundaries belonging to the higher class.
int bucket_score(double score);

std::vector<ExpertLabel> to_labels(const std::vector<ExpertScore>& scores, TermMode mode = TermMode::latest);

/// Independent seeded shuffle per side, then contiguous cuts at
/// floor(train*n) and floor((train+validation)*n).
SplitAssignment split_scores(const std::vector<ExpertLabel>& labels, const SplitRatios& ratios,
                             std::uint64_t seed);

/// Row r is standard normal, seeded by (seed, r) so rows do not depend on n.
Matrix synth_features(std::size_t n, std::size_t d_in, std::uint64_t seed);

}  // namespace par

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "par/hin.hpp"
#include "par/ingest.hpp"
#include "par/matrix.hpp"

namespace par {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

struct MetricsReport {
  Metrics liberal;
  Metrics conservative;
  /// Per-metric harmonic mean of the two sides.
  Metrics combined;
};

/// Accuracy, macro-F1 over the classes present in `golds`, and micro-F1.
Metrics metrics(std::span<const int> preds, std::span<const int> golds);

/// 2ab / (a + b), and 0 when either side is 0.
double harmonic_combine(double a, double b);
Metrics harmonic_combine(const Metrics& a, const Metrics& b);

/// Davies-Bouldin index with Euclidean centroids; cluster spread is the mean
/// distance of members to their centroid.
double dbi(const Matrix& points, std::span<const int> cluster_ids);

/// Projects centered rows onto the top principal directions of the sample
/// covariance. Each direction is signed so its largest-magnitude loading is
/// positive.
Matrix pca_project(const Matrix& embeddings, std::size_t out_dims = 2);

/// Expected class index sum_k k * dist_k, in [0, 4].
double continuous_stance(std::span<const double> dist);

/// Label for a liberal-stance distribution, from "very conservative" (argmax 0)
/// to "very liberal" (argmax 4).
std::string governor_label(std::span<const double> liberal_dist);

struct StanceScore {
  EntityId entity = 0;
  std::array<double, kNumClasses> liberal{};
  std::array<double, kNumClasses> conservative{};
  double liberal_continuous = 0.0;
  double conservative_continuous = 0.0;
  std::string label;
};

/// One StanceScore per requested row of the head outputs.
std::vector<StanceScore> stance_scores(const Matrix& liberal, const Matrix& conservative,
                                       std::span<const EntityId> entities);

}  // namespace par

#include "par/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>

namespace par {

Metrics metrics(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) throw AnalysisError("metrics: prediction and gold lengths differ");
  if (golds.empty()) throw AnalysisError("metrics: empty input");
  std::map<int, std::size_t> tp, fp, fn;
  std::set<int> present(golds.begin(), golds.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (preds[i] == golds[i]) {
      ++correct;
      ++tp[golds[i]];
    } else {
      ++fp[preds[i]];
      ++fn[golds[i]];
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(golds.size());

  double f1_sum = 0.0;
  for (int c : present) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    f1_sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
  }
  m.macro_f1 = f1_sum / static_cast<double>(present.size());

  // Single-label pooling: total FP equals total FN, so micro-F1 = accuracy.
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  for (auto& [c, v] : tp) all_tp += v;
  for (auto& [c, v] : fp) all_fp += v;
  for (auto& [c, v] : fn) all_fn += v;
  const double denom = 2.0 * all_tp + all_fp + all_fn;
  m.micro_f1 = denom > 0 ? 2.0 * all_tp / denom : 0.0;
  return m;
}

double harmonic_combine(double a, double b) {
  if (a < 0 || b < 0) throw AnalysisError("harmonic_combine: negative input");
  if (a == 0 || b == 0) return 0.0;
  return 2.0 * a * b / (a + b);
}

Metrics harmonic_combine(const Metrics& a, const Metrics& b) {
  return {harmonic_combine(a.accuracy, b.accuracy), harmonic_combine(a.macro_f1, b.macro_f1),
          harmonic_combine(a.micro_f1, b.micro_f1)};
}

double dbi(const Matrix& points, std::span<const int> cluster_ids) {
  if (static_cast<std::size_t>(points.rows()) != cluster_ids.size())
    throw AnalysisError("dbi: one cluster id per point required");
  std::map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < cluster_ids.size(); ++i) members[cluster_ids[i]].push_back(static_cast<Index>(i));
  if (members.size() < 2) throw AnalysisError("dbi: at least 2 clusters required");

  std::vector<Eigen::RowVectorXd> centroid;
  std::vector<double> spread;
  for (const auto& [id, rows] : members) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(points.cols());
    for (Index r : rows) c += points.row(r);
    c /= static_cast<double>(rows.size());
    double s = 0.0;
    for (Index r : rows) s += (points.row(r) - c).norm();
    centroid.push_back(c);
    spread.push_back(s / static_cast<double>(rows.size()));
  }

  const std::size_t k = centroid.size();
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double separation = (centroid[i] - centroid[j]).norm();
      if (separation == 0.0) throw AnalysisError("dbi: coincident cluster centroids (degenerate clustering)");
      worst = std::max(worst, (spread[i] + spread[j]) / separation);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

Matrix pca_project(const Matrix& embeddings, std::size_t out_dims) {
  const Index n = embeddings.rows();
  const Index d = embeddings.cols();
  const auto k = static_cast<Index>(out_dims);
  if (n < k) throw AnalysisError("pca_project: fewer rows than output dimensions");
  if (d < k) throw AnalysisError("pca_project: fewer columns than output dimensions");

  Matrix centered = embeddings.rowwise() - embeddings.colwise().mean();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / std::max<double>(1.0, static_cast<double>(n - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw AnalysisError("pca_project: eigendecomposition failed");

  // Eigenvalues come back ascending.
  Eigen::MatrixXd basis(d, k);
  for (Index c = 0; c < k; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Index arg = 0;
    for (Index r = 1; r < d; ++r)
      if (std::abs(v(r)) > std::abs(v(arg)) + 1e-12) arg = r;
    if (v(arg) < 0) v = -v;
    basis.col(c) = v;
  }
  return centered * basis;
}

double continuous_stance(std::span<const double> dist) {
  if (dist.size() != static_cast<std::size_t>(kNumClasses))
    throw AnalysisError("continuous_stance: expected a 5-class distribution");
  double out = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) out += static_cast<double>(i) * dist[i];
  return out;
}

std::string governor_label(std::span<const double> liberal_dist) {
  if (liberal_dist.size() != static_cast<std::size_t>(kNumClasses))
    throw AnalysisError("governor_label: expected a 5-class distribution");
  static const std::array<const char*, kNumClasses> names = {"very conservative", "lean conservative", "neutral",
                                                             "lean liberal", "very liberal"};
  std::size_t best = 0;
  for (std::size_t i = 1; i < liberal_dist.size(); ++i)
    if (liberal_dist[i] > liberal_dist[best]) best = i;
  return names[best];
}

std::vector<StanceScore> stance_scores(const Matrix& liberal, const Matrix& conservative,
                                       std::span<const EntityId> entities) {
  if (liberal.cols() != kNumClasses || conservative.cols() != kNumClasses || liberal.rows() != conservative.rows())
    throw AnalysisError("stance_scores: head outputs must be n x 5");
  std::vector<StanceScore> out;
  for (EntityId e : entities) {
    const auto r = static_cast<Index>(e);
    if (r >= liberal.rows()) throw AnalysisError("stance_scores: entity out of range");
    StanceScore s;
    s.entity = e;
    for (int c = 0; c < kNumClasses; ++c) {
      s.liberal[static_cast<std::size_t>(c)] = liberal(r, c);
      s.conservative[static_cast<std::size_t>(c)] = conservative(r, c);
    }
    s.liberal_continuous = continuous_stance(s.liberal);
    s.conservative_continuous = continuous_stance(s.conservative);
    s.label = governor_label(s.liberal);
    out.push_back(s);
  }
  return out;
}

}  // namespace par

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "par/analysis.hpp"
#include "par/hin.hpp"

namespace par {

/// id,e0..e{d-1} for the listed rows of `x`.
void write_embeddings(const std::filesystem::path& path, const Matrix& x, std::span<const EntityId> rows);

/// Reads an embeddings file back as (ids, matrix with one row per id).
std::pair<std::vector<EntityId>, Matrix> read_embeddings(const std::filesystem::path& path);

/// id,name,l0..l4,c0..c4,lib_cont,con_cont,label
void write_stances(const std::filesystem::path& path, const Hin& hin, std::span<const StanceScore> scores);

struct ProjectedPoint {
  EntityId entity = 0;
  double x = 0.0;
  double y = 0.0;
  std::string group;
};

/// id,name,kind,px,py,group
void write_projection_csv(const std::filesystem::path& path, const Hin& hin, std::span<const ProjectedPoint> points);

/// Self-contained scatter plot, one colour per group.
void write_projection_svg(const std::filesystem::path& path, std::span<const ProjectedPoint> points);

}  // namespace par

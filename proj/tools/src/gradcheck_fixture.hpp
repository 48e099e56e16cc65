#pragma once

#include <cstdint>

#include "par/gradcheck.hpp"
#include "par/hin.hpp"
#include "par/ingest.hpp"
#include "par/model.hpp"

namespace par::cli {

/// Random 10-node graph using three relations, with features, labels and a
/// small gated encoder.
struct GradCheckFixture {
  Hin hin;
  ModelParams params;
  std::vector<ExpertLabel> labels;
  std::vector<EntityId> consistency_entities;
};

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed);

/// Finite-difference check of the combined training loss over every model tensor.
num::GradCheckResult model_gradcheck(std::uint64_t seed);

}  // namespace par::cli

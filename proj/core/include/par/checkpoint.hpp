#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "par/matrix.hpp"
#include "par/model.hpp"

namespace par {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A directory holding `manifest.txt` plus one raw little-endian float64
/// file per tensor. The manifest lists key/value metadata and, per tensor,
/// its name, shape and file name.
struct TensorBundle {
  std::string format;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& at(const std::string& name) const;
};

void save_bundle(const TensorBundle& bundle, const std::filesystem::path& dir);
TensorBundle load_bundle(const std::filesystem::path& dir);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& dir);
ModelParams load_checkpoint(const std::filesystem::path& dir);

}  // namespace par

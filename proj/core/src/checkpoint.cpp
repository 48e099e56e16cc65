#include "par/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "par/csv.hpp"

namespace par {

namespace {

constexpr std::string_view kMagic = "par-bundle";
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little, "tensor files are written in native little-endian order");

std::string file_name_for(std::size_t index) { return "t" + std::to_string(index) + ".f64"; }

}  // namespace

const Matrix& TensorBundle::at(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return m;
  throw CheckpointError("bundle has no tensor '" + name + "'");
}

void save_bundle(const TensorBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw CheckpointError("cannot write " + (dir / "manifest.txt").string());
  manifest << kMagic << ' ' << kVersion << ' ' << bundle.format << '\n';
  for (const auto& [key, value] : bundle.meta) manifest << "meta " << key << ' ' << value << '\n';
  for (std::size_t i = 0; i < bundle.tensors.size(); ++i) {
    const auto& [name, m] = bundle.tensors[i];
    const auto file = file_name_for(i);
    manifest << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << file << '\n';
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + (dir / file).string());
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
}

TensorBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw CheckpointError("cannot open " + (dir / "manifest.txt").string());
  TensorBundle bundle;
  std::string magic;
  int version = 0;
  manifest >> magic >> version >> bundle.format;
  if (magic != kMagic || version != kVersion)
    throw CheckpointError((dir / "manifest.txt").string() + ": not a version-1 bundle");
  std::string line;
  std::getline(manifest, line);
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    if (tag == "meta") {
      std::string key, value;
      in >> key >> value;
      bundle.meta[key] = value;
    } else if (tag == "tensor") {
      std::string name, file;
      Index rows = 0, cols = 0;
      if (!(in >> name >> rows >> cols >> file) || rows < 0 || cols < 0)
        throw CheckpointError("malformed manifest line: " + line);
      Matrix m(rows, cols);
      std::ifstream data(dir / file, std::ios::binary);
      if (!data) throw CheckpointError("cannot open " + (dir / file).string());
      data.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (data.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double)) || data.peek() != EOF)
        throw CheckpointError((dir / file).string() + ": size does not match manifest shape");
      bundle.tensors.emplace_back(std::move(name), std::move(m));
    } else {
      throw CheckpointError("malformed manifest line: " + line);
    }
  }
  return bundle;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& dir) {
  TensorBundle bundle;
  bundle.format = "par-model";
  const auto& o = params.options;
  bundle.meta = {
      {"d_in", std::to_string(o.d_in)},
      {"hidden", std::to_string(o.hidden)},
      {"layers", std::to_string(o.layers)},
      {"activation", std::string(to_string(o.activation))},
      {"leaky_slope", csv::format_double(o.leaky_slope)},
      {"variant", std::string(to_string(o.variant))},
  };
  for_each_tensor(params.tensors, params.gated(),
                  [&](const std::string& name, const Matrix& m) { bundle.tensors.emplace_back(name, m); });
  save_bundle(bundle, dir);
}

ModelParams load_checkpoint(const std::filesystem::path& dir) {
  const TensorBundle bundle = load_bundle(dir);
  if (bundle.format != "par-model") throw CheckpointError(dir.string() + ": not a model checkpoint");
  const auto get = [&](const std::string& key) -> const std::string& {
    auto it = bundle.meta.find(key);
    if (it == bundle.meta.end()) throw CheckpointError("checkpoint manifest lacks '" + key + "'");
    return it->second;
  };
  ModelOptions o;
  try {
    o.d_in = static_cast<std::size_t>(csv::parse_int(get("d_in")));
    o.hidden = static_cast<std::size_t>(csv::parse_int(get("hidden")));
    o.layers = static_cast<std::size_t>(csv::parse_int(get("layers")));
    o.leaky_slope = csv::parse_double(get("leaky_slope"));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  }
  const auto act = parse_activation(get("activation"));
  const auto variant = parse_variant(get("variant"));
  if (!act || !variant) throw CheckpointError("bad checkpoint activation or variant");
  o.activation = *act;
  o.variant = *variant;

  // Build the structure, then overwrite every tensor from the bundle.
  ModelParams params = init_params(o, 0);
  std::size_t next = 0;
  for_each_tensor(params.tensors, params.gated(), [&](const std::string& name, Matrix& m) {
    if (next >= bundle.tensors.size() || bundle.tensors[next].first != name)
      throw CheckpointError("checkpoint tensor order does not match the model layout at '" + name + "'");
    const Matrix& stored = bundle.tensors[next++].second;
    if (stored.rows() != m.rows() || stored.cols() != m.cols())
      throw CheckpointError("tensor '" + name + "' has the wrong shape");
    m = stored;
  });
  if (next != bundle.tensors.size()) throw CheckpointError("checkpoint has extra tensors");
  return params;
}

}  // namespace par

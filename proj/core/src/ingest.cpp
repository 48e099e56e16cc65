#include "par/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "par/csv.hpp"

namespace par {

namespace {

void expect_header(const csv::Table& table, const std::filesystem::path& path, const std::vector<std::string>& want) {
  if (table.header.size() < want.size() || !std::equal(want.begin(), want.end(), table.header.begin()))
    throw IngestError(path.string() + ": unexpected header");
}

std::string where(const std::filesystem::path& path, const csv::Table& table, std::size_t row) {
  return path.string() + ":" + std::to_string(table.line_numbers[row]) + ": ";
}

EntityId parse_entity(const std::string& text, std::size_t n_nodes) {
  const long long id = csv::parse_int(text);
  if (id < 0 || static_cast<std::size_t>(id) >= n_nodes)
    throw IngestError("entity id " + text + " is not a node of the graph");
  return static_cast<EntityId>(id);
}

csv::Table read_table(const std::filesystem::path& path) {
  try {
    return csv::read_file(path);
  } catch (const IngestError&) {
    throw;
  } catch (const std::exception& e) {
    throw IngestError(e.what());
  }
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::liberal ? "liberal" : "conservative"; }

std::optional<Side> parse_side(std::string_view text) {
  if (text == "liberal") return Side::liberal;
  if (text == "conservative") return Side::conservative;
  return std::nullopt;
}

FeatureSource FeatureSource::parse(const std::string& spec, std::size_t synthetic_dim) {
  FeatureSource source;
  constexpr std::string_view prefix = "synthetic:";
  if (spec.rfind(prefix, 0) == 0) {
    try {
      source.synthetic_seed = static_cast<std::uint64_t>(csv::parse_int(spec.substr(prefix.size())));
    } catch (const std::exception&) {
      throw IngestError("bad synthetic feature token '" + spec + "'");
    }
    if (synthetic_dim == 0) throw IngestError("synthetic features need a positive dimension");
    source.synthetic_dim = synthetic_dim;
  } else {
    source.path = spec;
  }
  return source;
}

Hin load_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
               const FeatureSource& features) {
  Hin hin;
  const auto nodes = read_table(nodes_path);
  expect_header(nodes, nodes_path, {"id", "kind", "name"});
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    const auto& row = nodes.rows[r];
    try {
      if (row.size() != 3) throw IngestError("expected 3 fields");
      if (csv::parse_int(row[0]) != static_cast<long long>(r))
        throw IngestError("node ids must be consecutive from 0");
      const auto kind = parse_node_kind(row[1]);
      if (!kind) throw IngestError("unknown node kind '" + row[1] + "'");
      hin.add_node(*kind, row[2]);
    } catch (const std::exception& e) {
      throw IngestError(where(nodes_path, nodes, r) + e.what());
    }
  }

  const auto edges = read_table(edges_path);
  expect_header(edges, edges_path, {"src", "dst", "relation"});
  for (std::size_t r = 0; r < edges.rows.size(); ++r) {
    const auto& row = edges.rows[r];
    try {
      if (row.size() != 3) throw IngestError("expected 3 fields");
      const auto rel = parse_relation(row[2]);
      if (!rel) throw IngestError("unknown relation '" + row[2] + "'");
      hin.add_edge(parse_entity(row[0], hin.node_count()), parse_entity(row[1], hin.node_count()), *rel);
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError(where(edges_path, edges, r) + e.what());
    }
  }

  if (features.path) {
    hin.set_features(load_features(*features.path, hin.node_count()));
  } else if (features.synthetic_dim > 0) {
    hin.set_features(synth_features(hin.node_count(), features.synthetic_dim, features.synthetic_seed));
  }
  return hin;
}

Matrix load_features(const std::filesystem::path& path, std::size_t n_nodes) {
  const auto table = read_table(path);
  if (table.header.empty() || table.header[0] != "id") throw IngestError(path.string() + ": unexpected header");
  const std::size_t dim = table.header.size() - 1;
  if (dim == 0) throw IngestError(path.string() + ": no feature columns");
  if (table.rows.size() != n_nodes)
    throw IngestError(path.string() + ": " + std::to_string(table.rows.size()) + " feature rows for " +
                      std::to_string(n_nodes) + " nodes");
  Matrix out(static_cast<Index>(n_nodes), static_cast<Index>(dim));
  std::vector<bool> seen(n_nodes, false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      if (row.size() != dim + 1) throw IngestError("expected " + std::to_string(dim + 1) + " fields");
      const EntityId id = parse_entity(row[0], n_nodes);
      if (seen[id]) throw IngestError("duplicate feature row for id " + row[0]);
      seen[id] = true;
      for (std::size_t c = 0; c < dim; ++c)
        out(static_cast<Index>(id), static_cast<Index>(c)) = csv::parse_double(row[c + 1]);
    } catch (const std::exception& e) {
      throw IngestError(where(path, table, r) + e.what());
    }
  }
  return out;
}

std::vector<ExpertScore> load_scores(const std::filesystem::path& path, const Hin& hin) {
  const auto table = read_table(path);
  expect_header(table, path, {"entity_id", "side", "score"});
  std::vector<ExpertScore> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      if (row.size() < 3 || row.size() > 4) throw IngestError("expected 3 or 4 fields");
      ExpertScore s;
      s.entity = parse_entity(row[0], hin.node_count());
      const auto side = parse_side(row[1]);
      if (!side) throw IngestError("unknown side '" + row[1] + "'");
      s.side = *side;
      s.score = csv::parse_double(row[2]);
      if (!(s.score >= 0.0 && s.score <= 1.0)) throw IngestError("score " + row[2] + " outside [0,1]");
      if (row.size() == 4) s.term = row[3];
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw IngestError(where(path, table, r) + e.what());
    }
  }
  return out;
}

void write_graph(const Hin& hin, const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& features_path) {
  std::ofstream nodes(nodes_path);
  if (!nodes) throw IngestError("cannot write " + nodes_path.string());
  csv::write_row(nodes, {"id", "kind", "name"});
  for (EntityId i = 0; i < hin.node_count(); ++i)
    csv::write_row(nodes, {std::to_string(i), std::string(to_string(hin.node(i).kind)), hin.node(i).name});

  std::ofstream edges(edges_path);
  if (!edges) throw IngestError("cannot write " + edges_path.string());
  csv::write_row(edges, {"src", "dst", "relation"});
  for (RelationKind rel : kAllRelations)
    for (const Edge& e : hin.edges(rel))
      csv::write_row(edges, {std::to_string(e.src), std::to_string(e.dst), std::string(relation_code(rel))});

  if (features_path && hin.has_features()) {
    std::ofstream feats(*features_path);
    if (!feats) throw IngestError("cannot write " + features_path->string());
    const Matrix& f = hin.features();
    csv::Row header{"id"};
    for (Index c = 0; c < f.cols(); ++c) header.push_back("f" + std::to_string(c));
    csv::write_row(feats, header);
    for (Index r = 0; r < f.rows(); ++r) {
      csv::Row row{std::to_string(r)};
      for (Index c = 0; c < f.cols(); ++c) row.push_back(csv::format_double(f(r, c)));
      csv::write_row(feats, row);
    }
  }
}

void write_scores(const std::vector<ExpertScore>& scores, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path.string());
  csv::write_row(out, {"entity_id", "side", "score", "term"});
  for (const auto& s : scores)
    csv::write_row(out, {std::to_string(s.entity), std::string(to_string(s.side)), csv::format_double(s.score), s.term});
}

int bucket_score(double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw IngestError("score outside [0,1]");
  if (score < 0.1) return 0;
  if (score < 0.25) return 1;
  if (score < 0.75) return 2;
  if (score < 0.9) return 3;
  return 4;
}

std::vector<ExpertLabel> to_labels(const std::vector<ExpertScore>& scores, TermMode mode) {
  std::vector<ExpertLabel> out;
  if (mode == TermMode::expand) {
    for (const auto& s : scores) out.push_back({s.entity, s.side, bucket_score(s.score)});
    return out;
  }
  // Latest term wins: terms compare lexicographically, later rows break ties.
  std::map<std::pair<EntityId, Side>, const ExpertScore*> latest;
  for (const auto& s : scores) {
    auto [it, inserted] = latest.try_emplace({s.entity, s.side}, &s);
    if (!inserted && s.term >= it->second->term) it->second = &s;
  }
  for (const auto& [key, s] : latest) out.push_back({s->entity, s->side, bucket_score(s->score)});
  return out;
}

SplitAssignment split_scores(const std::vector<ExpertLabel>& labels, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw IngestError("split ratios must be positive and sum to 1");
  SplitAssignment split;
  for (Side side : kSides) {
    std::vector<ExpertLabel> pool;
    for (const auto& l : labels)
      if (l.side == side) pool.push_back(l);
    if (pool.size() < 3)
      throw IngestError("side " + std::string(to_string(side)) + " has " + std::to_string(pool.size()) +
                        " labels; at least 3 are needed to split");
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (index_of(side) + 1)));
    std::shuffle(pool.begin(), pool.end(), rng);
    const double n = static_cast<double>(pool.size());
    const auto cut1 = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
    const auto cut2 = static_cast<std::size_t>(std::floor((ratios.train + ratios.validation) * n + 1e-9));
    auto& s = split[side];
    s.train.assign(pool.begin(), pool.begin() + cut1);
    s.validation.assign(pool.begin() + cut1, pool.begin() + cut2);
    s.test.assign(pool.begin() + cut2, pool.end());
  }
  return split;
}

Matrix synth_features(std::size_t n, std::size_t d_in, std::uint64_t seed) {
  if (n == 0 || d_in == 0) throw IngestError("synth_features needs n, d_in >= 1");
  Matrix out(static_cast<Index>(n), static_cast<Index>(d_in));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 rng(seq);
    for (std::size_t c = 0; c < d_in; ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = normal(rng);
  }
  return out;
}

}  // namespace par

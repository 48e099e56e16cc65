#include "par/hin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace par {

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "office_term", "legislator", "president", "governor", "state", "institution", "justice", "party",
};

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "party_affiliation", "home_state", "hold_office", "time_in_office", "appoint",
};

constexpr std::array<std::string_view, kNumRelations> kRelationCodes = {"R1", "R2", "R3", "R4", "R5"};

std::uint64_t edge_key(EntityId src, EntityId dst, RelationKind rel) {
  return (static_cast<std::uint64_t>(src) << 35) ^ (static_cast<std::uint64_t>(dst) << 3) ^
         static_cast<std::uint64_t>(rel);
}

std::string name_key(NodeKind kind, std::string_view name) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(kind)));
  key.append(name);
  return key;
}

void insert_sorted(std::vector<EntityId>& list, EntityId value) {
  auto it = std::lower_bound(list.begin(), list.end(), value);
  if (it == list.end() || *it != value) list.insert(it, value);
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(RelationKind rel) { return kRelationNames[index_of(rel)]; }
std::string_view relation_code(RelationKind rel) { return kRelationCodes[index_of(rel)]; }

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<NodeKind>(i);
  return std::nullopt;
}

std::optional<RelationKind> parse_relation(std::string_view text) {
  for (std::size_t i = 0; i < kRelationCodes.size(); ++i)
    if (kRelationCodes[i] == text) return static_cast<RelationKind>(i);
  return std::nullopt;
}

bool is_political_actor(NodeKind kind) {
  return kind == NodeKind::legislator || kind == NodeKind::president || kind == NodeKind::governor ||
         kind == NodeKind::justice;
}

bool endpoint_allowed(RelationKind rel, NodeKind src, NodeKind dst) {
  const bool elected = src == NodeKind::legislator || src == NodeKind::president || src == NodeKind::governor;
  const bool actor = elected || src == NodeKind::justice;
  switch (rel) {
    case RelationKind::party_affiliation:
      return elected && dst == NodeKind::party;
    case RelationKind::home_state:
      return actor && dst == NodeKind::state;
    case RelationKind::hold_office:
      return actor && dst == NodeKind::institution;
    case RelationKind::time_in_office:
      return actor && dst == NodeKind::office_term;
    case RelationKind::appoint:
      return (src == NodeKind::president && dst == NodeKind::justice) ||
             (src == NodeKind::governor && dst == NodeKind::legislator);
  }
  return false;
}

std::string endpoint_rule(RelationKind rel) {
  switch (rel) {
    case RelationKind::party_affiliation:
      return "{legislator,president,governor} -> party";
    case RelationKind::home_state:
      return "{legislator,president,governor,justice} -> state";
    case RelationKind::hold_office:
      return "{legislator,president,governor,justice} -> institution";
    case RelationKind::time_in_office:
      return "{legislator,president,governor,justice} -> office_term";
    case RelationKind::appoint:
      return "president -> justice or governor -> legislator";
  }
  return {};
}

SchemaError::SchemaError(RelationKind rel, NodeKind src, NodeKind dst)
    : GraphError("schema violation for relation " + std::string(relation_code(rel)) + " (" +
                 std::string(to_string(rel)) + "): " + std::string(to_string(src)) + " -> " +
                 std::string(to_string(dst)) + " not in " + endpoint_rule(rel)),
      relation_(rel) {}

EntityId Hin::add_node(NodeKind kind, std::string name) {
  if (name.empty()) throw GraphError("node name must be non-empty");
  auto key = name_key(kind, name);
  if (by_name_.contains(key))
    throw GraphError("duplicate node (" + std::string(to_string(kind)) + ", " + name + ")");
  const EntityId id = nodes_.size();
  by_name_.emplace(std::move(key), id);
  nodes_.push_back({kind, std::move(name)});
  for (auto& adj : adjacency_) adj.emplace_back();
  return id;
}

void Hin::check_id(EntityId id) const {
  if (id >= nodes_.size())
    throw GraphError("entity id " + std::to_string(id) + " out of range (" + std::to_string(nodes_.size()) +
                     " nodes)");
}

void Hin::add_edge(EntityId src, EntityId dst, RelationKind rel) {
  check_id(src);
  check_id(dst);
  const NodeKind sk = nodes_[src].kind;
  const NodeKind dk = nodes_[dst].kind;
  if (!endpoint_allowed(rel, sk, dk)) throw SchemaError(rel, sk, dk);
  if (!edge_keys_.insert(edge_key(src, dst, rel)).second)
    throw GraphError("duplicate edge " + std::to_string(src) + " -> " + std::to_string(dst) + " under " +
                     std::string(relation_code(rel)));
  edges_[index_of(rel)].push_back({src, dst});
  auto& adj = adjacency_[index_of(rel)];
  insert_sorted(adj[src], dst);
  insert_sorted(adj[dst], src);
}

std::size_t Hin::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : edges_) total += list.size();
  return total;
}

const Node& Hin::node(EntityId id) const {
  check_id(id);
  return nodes_[id];
}

std::optional<EntityId> Hin::find(NodeKind kind, std::string_view name) const {
  auto it = by_name_.find(name_key(kind, name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::span<const EntityId> Hin::neighbors(EntityId id, RelationKind rel) const {
  check_id(id);
  return adjacency_[index_of(rel)][id];
}

std::vector<EntityId> Hin::positive_set(EntityId id) const {
  check_id(id);
  std::vector<EntityId> out;
  for (const auto& adj : adjacency_) out.insert(out.end(), adj[id].begin(), adj[id].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EntityId> Hin::negative_set(EntityId id) const {
  const auto positives = positive_set(id);
  std::vector<EntityId> out;
  out.reserve(nodes_.size() - positives.size());
  auto pos = positives.begin();
  for (EntityId j = 0; j < nodes_.size(); ++j) {
    while (pos != positives.end() && *pos < j) ++pos;
    if (j == id || (pos != positives.end() && *pos == j)) continue;
    out.push_back(j);
  }
  return out;
}

void Hin::set_features(Matrix features) {
  if (static_cast<std::size_t>(features.rows()) != nodes_.size())
    throw GraphError("feature matrix has " + std::to_string(features.rows()) + " rows but graph has " +
                     std::to_string(nodes_.size()) + " nodes");
  features_ = std::move(features);
}

std::vector<SchemaViolation> validate(const Hin& hin) {
  std::vector<SchemaViolation> out;
  for (RelationKind rel : kAllRelations) {
    for (const Edge& e : hin.edges(rel)) {
      if (e.src >= hin.node_count() || e.dst >= hin.node_count() ||
          !endpoint_allowed(rel, hin.node(e.src).kind, hin.node(e.dst).kind))
        out.push_back({rel, e});
    }
  }
  return out;
}

Hin drop_relation_fraction(const Hin& hin, RelationKind rel, double keep, std::uint64_t seed) {
  if (!(keep >= 0.0 && keep <= 1.0)) throw GraphError("keep fraction must lie in [0,1]");
  const auto edges = hin.edges(rel);
  const std::size_t m = edges.size();
  // 1e-9 absorbs representation error in keep*m, e.g. 0.15*10
  const auto kept = std::min<std::size_t>(m, static_cast<std::size_t>(std::floor(keep * m + 0.5 + 1e-9)));

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(kept);
  std::sort(order.begin(), order.end());

  Hin out;
  for (const Node& n : hin.nodes()) out.add_node(n.kind, n.name);
  for (RelationKind r : kAllRelations) {
    if (r == rel) {
      for (std::size_t idx : order) out.add_edge(edges[idx].src, edges[idx].dst, r);
    } else {
      for (const Edge& e : hin.edges(r)) out.add_edge(e.src, e.dst, r);
    }
  }
  if (hin.has_features()) out.set_features(hin.features());
  return out;
}

}  // namespace par

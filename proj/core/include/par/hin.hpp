#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "par/matrix.hpp"

namespace par {

/// Every node in the political-actor network carries exactly one of these kinds.
enum class NodeKind : std::uint8_t {
  office_term,
  legislator,
  president,
  governor,
  state,
  institution,
  justice,
  party,
};

inline constexpr std::array<NodeKind, 8> kAllNodeKinds = {
    NodeKind::office_term, NodeKind::legislator, NodeKind::president,   NodeKind::governor,
    NodeKind::state,       NodeKind::institution, NodeKind::justice,     NodeKind::party,
};

/// Edge relations, R1 through R5 in file order.
enum class RelationKind : std::uint8_t {
  party_affiliation,
  home_state,
  hold_office,
  time_in_office,
  appoint,
};

inline constexpr std::size_t kNumRelations = 5;

inline constexpr std::array<RelationKind, kNumRelations> kAllRelations = {
    RelationKind::party_affiliation, RelationKind::home_state, RelationKind::hold_office,
    RelationKind::time_in_office, RelationKind::appoint,
};

using EntityId = std::size_t;

std::string_view to_string(NodeKind kind);
std::string_view to_string(RelationKind rel);
/// "R1".."R5".
std::string_view relation_code(RelationKind rel);
std::optional<NodeKind> parse_node_kind(std::string_view text);
/// Accepts the codes "R1".."R5".
std::optional<RelationKind> parse_relation(std::string_view text);

inline std::size_t index_of(RelationKind rel) { return static_cast<std::size_t>(rel); }

/// Legislators, presidents, governors and justices.
bool is_political_actor(NodeKind kind);

/// True when (src, dst) is a legal endpoint pair for `rel`.
bool endpoint_allowed(RelationKind rel, NodeKind src, NodeKind dst);

/// Human-readable statement of the endpoint rule for `rel`.
std::string endpoint_rule(RelationKind rel);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an edge violates its relation's endpoint-kind rule.
class SchemaError : public GraphError {
 public:
  SchemaError(RelationKind rel, NodeKind src, NodeKind dst);

  RelationKind relation() const { return relation_; }

 private:
  RelationKind relation_;
};

struct Node {
  NodeKind kind;
  std::string name;
};

struct Edge {
  EntityId src;
  EntityId dst;
};

struct SchemaViolation {
  RelationKind relation;
  Edge edge;
};

/// Typed multigraph over political actors and their context.
///
/// Edges are stored in the direction they were added but every neighborhood
/// query treats them as undirected within their relation.
class Hin {
 public:
  EntityId add_node(NodeKind kind, std::string name);
  void add_edge(EntityId src, EntityId dst, RelationKind rel);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count(RelationKind rel) const { return edges_[index_of(rel)].size(); }
  std::size_t edge_count() const;

  const Node& node(EntityId id) const;
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges(RelationKind rel) const { return edges_[index_of(rel)]; }

  std::optional<EntityId> find(NodeKind kind, std::string_view name) const;

  /// N_r(id), ascending.
  std::span<const EntityId> neighbors(EntityId id, RelationKind rel) const;
  /// Union of neighbors over all relations, ascending.
  std::vector<EntityId> positive_set(EntityId id) const;
  /// Every node outside positive_set(id) other than id itself, ascending.
  std::vector<EntityId> negative_set(EntityId id) const;

  bool has_features() const { return features_.size() > 0; }
  const Matrix& features() const { return features_; }
  /// Row count must equal node_count().
  void set_features(Matrix features);
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

 private:
  void check_id(EntityId id) const;

  std::vector<Node> nodes_;
  std::array<std::vector<Edge>, kNumRelations> edges_;
  std::array<std::vector<std::vector<EntityId>>, kNumRelations> adjacency_;
  std::unordered_set<std::uint64_t> edge_keys_;
  std::unordered_map<std::string, EntityId> by_name_;
  Matrix features_;
};

/// Re-checks every stored edge against its endpoint rule.
std::vector<SchemaViolation> validate(const Hin& hin);

/// Copy of `hin` keeping round_half_up(keep * m) of the `rel` edges.
///
/// The kept edges are a prefix of one seeded permutation, so for a fixed seed
/// a larger `keep` always yields a superset.
Hin drop_relation_fraction(const Hin& hin, RelationKind rel, double keep, std::uint64_t seed);

}  // namespace par

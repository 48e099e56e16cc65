#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "par/hin.hpp"

using namespace par;

namespace {

// Endpoint rules written out independently of the library.
bool legal(RelationKind rel, NodeKind s, NodeKind d) {
  using K = NodeKind;
  const std::set<K> elected{K::legislator, K::president, K::governor};
  const std::set<K> actors{K::legislator, K::president, K::governor, K::justice};
  switch (rel) {
    case RelationKind::party_affiliation: return elected.contains(s) && d == K::party;
    case RelationKind::home_state: return actors.contains(s) && d == K::state;
    case RelationKind::hold_office: return actors.contains(s) && d == K::institution;
    case RelationKind::time_in_office: return actors.contains(s) && d == K::office_term;
    case RelationKind::appoint:
      return (s == K::president && d == K::justice) || (s == K::governor && d == K::legislator);
  }
  return false;
}

Hin star(std::size_t spokes) {
  Hin h;
  const EntityId party = h.add_node(NodeKind::party, "P");
  for (std::size_t i = 0; i < spokes; ++i) {
    const EntityId l = h.add_node(NodeKind::legislator, "L" + std::to_string(i));
    h.add_edge(l, party, RelationKind::party_affiliation);
  }
  return h;
}

std::set<std::pair<EntityId, EntityId>> edge_set(const Hin& h, RelationKind r) {
  std::set<std::pair<EntityId, EntityId>> s;
  for (const auto& e : h.edges(r)) s.emplace(e.src, e.dst);
  return s;
}

}  // namespace

TEST(Hin, AddNodeAssignsConsecutiveIds) {
  Hin h;
  EXPECT_EQ(h.add_node(NodeKind::party, "Democratic Party"), 0u);
  EXPECT_THROW(h.add_node(NodeKind::party, "Democratic Party"), GraphError);
  EXPECT_THROW(h.add_node(NodeKind::party, ""), GraphError);
  // Same name under a different kind is a different entity.
  EXPECT_EQ(h.add_node(NodeKind::state, "Democratic Party"), 1u);
}

TEST(Hin, ManyNodesGetDenseIds) {
  Hin h;
  for (int i = 0; i < 1069; ++i) EXPECT_EQ(h.add_node(NodeKind::legislator, "E" + std::to_string(i)), static_cast<EntityId>(i));
  EXPECT_EQ(h.node_count(), 1069u);
}

TEST(Hin, SchemaMatchesEndpointRulesForEveryCombination) {
  for (RelationKind rel : kAllRelations)
    for (NodeKind s : kAllNodeKinds)
      for (NodeKind d : kAllNodeKinds) {
        Hin h;
        const EntityId a = h.add_node(s, "a");
        const EntityId b = h.add_node(d, "b");
        if (legal(rel, s, d)) {
          EXPECT_NO_THROW(h.add_edge(a, b, rel)) << to_string(rel) << " " << to_string(s) << " " << to_string(d);
        } else {
          try {
            h.add_edge(a, b, rel);
            ADD_FAILURE() << "accepted illegal " << to_string(rel) << " " << to_string(s) << " -> " << to_string(d);
          } catch (const SchemaError& e) {
            EXPECT_EQ(e.relation(), rel);
            EXPECT_NE(std::string(e.what()).find(relation_code(rel)), std::string::npos);
          }
        }
      }
}

TEST(Hin, SpecExamplesForAddEdge) {
  Hin h;
  const auto leg = h.add_node(NodeKind::legislator, "L");
  const auto party = h.add_node(NodeKind::party, "P");
  const auto justice = h.add_node(NodeKind::justice, "J");
  const auto pres = h.add_node(NodeKind::president, "Pr");
  EXPECT_NO_THROW(h.add_edge(leg, party, RelationKind::party_affiliation));
  EXPECT_THROW(h.add_edge(justice, party, RelationKind::party_affiliation), SchemaError);
  EXPECT_NO_THROW(h.add_edge(pres, justice, RelationKind::appoint));
  EXPECT_THROW(h.add_edge(leg, party, RelationKind::party_affiliation), GraphError);
  EXPECT_THROW(h.add_edge(leg, 99, RelationKind::party_affiliation), GraphError);
}

TEST(Hin, NeighborsAreUndirectedAndSorted) {
  Hin h;
  const auto a = h.add_node(NodeKind::legislator, "a");
  const auto s1 = h.add_node(NodeKind::state, "s1");
  const auto s0 = h.add_node(NodeKind::state, "s0");
  EXPECT_TRUE(h.neighbors(a, RelationKind::home_state).empty());
  h.add_edge(a, s1, RelationKind::home_state);
  h.add_edge(a, s0, RelationKind::home_state);
  const auto n = h.neighbors(a, RelationKind::home_state);
  EXPECT_EQ(std::vector<EntityId>(n.begin(), n.end()), (std::vector<EntityId>{s1, s0}));
  EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
  const auto back = h.neighbors(s1, RelationKind::home_state);
  EXPECT_EQ(std::vector<EntityId>(back.begin(), back.end()), std::vector<EntityId>{a});
  EXPECT_TRUE(h.neighbors(a, RelationKind::party_affiliation).empty());
}

TEST(Hin, StarCenterHasKNeighbors) {
  const Hin h = star(7);
  EXPECT_EQ(h.neighbors(0, RelationKind::party_affiliation).size(), 7u);
}

TEST(Hin, PositiveAndNegativeSetsPartitionNodes) {
  Hin h;
  const auto a = h.add_node(NodeKind::legislator, "a");
  const auto p = h.add_node(NodeKind::party, "p");
  const auto s = h.add_node(NodeKind::state, "s");
  const auto t = h.add_node(NodeKind::office_term, "t");
  h.add_node(NodeKind::institution, "isolated");
  h.add_edge(a, p, RelationKind::party_affiliation);
  h.add_edge(a, s, RelationKind::home_state);
  EXPECT_EQ(h.positive_set(a), (std::vector<EntityId>{p, s}));
  EXPECT_TRUE(h.positive_set(4).empty());
  for (EntityId id = 0; id < h.node_count(); ++id) {
    std::vector<EntityId> all = h.positive_set(id);
    const auto neg = h.negative_set(id);
    all.insert(all.end(), neg.begin(), neg.end());
    all.push_back(id);
    std::sort(all.begin(), all.end());
    std::vector<EntityId> expected(h.node_count());
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = i;
    EXPECT_EQ(all, expected);
  }
  (void)t;
}

TEST(Hin, FullyConnectedNodeHasEmptyNegativeSet) {
  const Hin h = star(4);
  EXPECT_TRUE(h.negative_set(0).empty());
}

TEST(Hin, FeaturesMustMatchNodeCount) {
  Hin h = star(2);
  EXPECT_THROW(h.set_features(Matrix::Zero(2, 4)), GraphError);
  h.set_features(Matrix::Zero(3, 4));
  EXPECT_EQ(h.feature_dim(), 4u);
}

TEST(Hin, ValidatorFindsNoViolationsOnBuiltGraphs) {
  EXPECT_TRUE(validate(star(5)).empty());
}

TEST(DropRelation, KeepOneIsIdentityAndKeepZeroRemovesOnlyThatRelation) {
  Hin h;
  const auto s = h.add_node(NodeKind::state, "S");
  const auto p = h.add_node(NodeKind::party, "P");
  for (int i = 0; i < 10; ++i) {
    const auto l = h.add_node(NodeKind::legislator, "L" + std::to_string(i));
    h.add_edge(l, s, RelationKind::home_state);
    h.add_edge(l, p, RelationKind::party_affiliation);
  }
  const Hin full = drop_relation_fraction(h, RelationKind::home_state, 1.0, 3);
  EXPECT_EQ(edge_set(full, RelationKind::home_state), edge_set(h, RelationKind::home_state));
  const Hin none = drop_relation_fraction(h, RelationKind::home_state, 0.0, 3);
  EXPECT_EQ(none.edge_count(RelationKind::home_state), 0u);
  EXPECT_EQ(edge_set(none, RelationKind::party_affiliation), edge_set(h, RelationKind::party_affiliation));
  EXPECT_EQ(drop_relation_fraction(h, RelationKind::home_state, 0.5, 3).edge_count(RelationKind::home_state), 5u);
  // Half-up rounding: 0.25 * 10 = 2.5 -> 3, 0.35 * 10 = 3.5 -> 4.
  EXPECT_EQ(drop_relation_fraction(h, RelationKind::home_state, 0.25, 3).edge_count(RelationKind::home_state), 3u);
  EXPECT_EQ(drop_relation_fraction(h, RelationKind::home_state, 0.35, 3).edge_count(RelationKind::home_state), 4u);
}

TEST(DropRelation, NestedAcrossKeepValuesAndDeterministic) {
  const Hin h = star(20);
  std::set<std::pair<EntityId, EntityId>> previous;
  for (int step = 0; step <= 10; ++step) {
    const auto cur = edge_set(drop_relation_fraction(h, RelationKind::party_affiliation, step / 10.0, 11),
                              RelationKind::party_affiliation);
    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), previous.begin(), previous.end()));
    previous = cur;
  }
  EXPECT_EQ(edge_set(drop_relation_fraction(h, RelationKind::party_affiliation, 0.4, 5), RelationKind::party_affiliation),
            edge_set(drop_relation_fraction(h, RelationKind::party_affiliation, 0.4, 5), RelationKind::party_affiliation));
  EXPECT_THROW(drop_relation_fraction(h, RelationKind::party_affiliation, 1.5, 0), GraphError);
}

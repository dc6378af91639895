#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace spnbn {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

// An elimination or topological order: a permutation of all node ids.
using Ordering = std::vector<NodeId>;

// Directed acyclic graph over node ids 0..node_count-1.  Edges live in a
// sorted set; adjacency lists are derived at construction.  Instances are
// immutable; with_edge/without_edge return modified copies.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int node_count);
  Dag(int node_count, const std::vector<Edge>& edges);

  int node_count() const { return node_count_; }
  const std::set<Edge>& edges() const { return edges_; }
  bool has_edge(NodeId from, NodeId to) const;
  bool adjacent(NodeId a, NodeId b) const;

  const std::vector<NodeId>& parents(NodeId v) const;
  const std::vector<NodeId>& children(NodeId v) const;
  std::vector<NodeId> ancestors(NodeId v) const;
  std::vector<NodeId> descendants(NodeId v) const;

  Dag with_edge(NodeId from, NodeId to) const;
  Dag with_edges(const std::set<Edge>& extra) const;
  Dag without_edge(NodeId from, NodeId to) const;

  bool operator==(const Dag& other) const {
    return node_count_ == other.node_count_ && edges_ == other.edges_;
  }

 private:
  void check_node(NodeId v) const;
  void rebuild();

  int node_count_ = 0;
  std::set<Edge> edges_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
};

struct Relatives {
  std::vector<NodeId> parents;
  std::vector<NodeId> children;
  std::vector<NodeId> ancestors;
  std::vector<NodeId> descendants;
};

Relatives relatives(const Dag& dag, NodeId v);

// Triples (p1, collider, p2) with p1 < p2, both edges into the collider and
// p1, p2 non-adjacent.
std::vector<std::tuple<NodeId, NodeId, NodeId>> v_structures(const Dag& dag);

// Linear-time d-separation (ancestor-closure reachability).  x and y must be
// nonempty and x, y, z pairwise disjoint.
bool d_separated(const Dag& dag, const std::vector<NodeId>& x, const std::vector<NodeId>& z,
                 const std::vector<NodeId>& y);

bool is_topological(const Dag& dag, const Ordering& order);
// True when every node appears after all of its children.
bool is_reverse_topological(const Dag& dag, const Ordering& order);

// All orderings that list each node after all of its children, in
// lexicographic order.  Exponential in general; intended for small graphs.
std::vector<Ordering> reverse_topological_orderings(const Dag& dag);

// The lexicographically smallest reverse topological ordering.
Ordering first_reverse_topological(const Dag& dag);

// One pass of directed moralization: all pairs (vi, vj), vi before vj in
// prec, non-adjacent, sharing a child.  prec must be topological for dag.
std::set<Edge> moralization_edges(const Dag& dag, const Ordering& prec);

// Fixpoint of repeatedly adding directed moralization edges.
Dag moral_closure(const Dag& dag, const Ordering& prec);

Ordering identity_ordering(int n);

// Deterministic DOT rendering; names may be empty (ids are used).
std::string dag_to_dot(const Dag& dag, const std::vector<std::string>& names = {});

}  // namespace spnbn

#pragma once

// Brute-force reference implementations used only by tests; each one is an
// independent route to the answer the library computes structurally.

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "spnbn/bayesnet.hpp"
#include "spnbn/circuit.hpp"
#include "spnbn/dag.hpp"

namespace spnbn::testing {

// d-separation by exhaustive enumeration of undirected simple paths.
inline bool d_separated_by_paths(const Dag& dag, const std::vector<NodeId>& xs,
                                 const std::vector<NodeId>& zs, const std::vector<NodeId>& ys) {
  std::set<NodeId> z(zs.begin(), zs.end());
  std::set<NodeId> y(ys.begin(), ys.end());

  std::vector<std::set<NodeId>> desc(dag.node_count());
  for (NodeId v = 0; v < dag.node_count(); ++v) {
    auto d = dag.descendants(v);
    desc[v] = {d.begin(), d.end()};
  }
  auto collider_blocked = [&](NodeId w) {
    if (z.count(w)) return false;
    for (NodeId d : desc[w])
      if (z.count(d)) return false;
    return true;
  };

  // DFS over undirected simple paths; forward[i] records whether step i
  // follows the edge direction.
  std::vector<NodeId> path;
  std::vector<bool> forward;
  std::vector<bool> on_path(dag.node_count(), false);
  bool found_active = false;

  auto path_active = [&]() {
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      bool collider = forward[i - 1] && !forward[i];
      NodeId w = path[i];
      if (collider ? collider_blocked(w) : z.count(w) > 0) return false;
    }
    return true;
  };

  std::function<void(NodeId)> dfs = [&](NodeId v) {
    if (found_active) return;
    if (y.count(v)) {
      // a blocked prefix blocks every extension, so stopping here is sound
      if (path_active()) found_active = true;
      return;
    }
    for (NodeId c : dag.children(v)) {
      if (on_path[c]) continue;
      path.push_back(c);
      forward.push_back(true);
      on_path[c] = true;
      dfs(c);
      on_path[c] = false;
      path.pop_back();
      forward.pop_back();
    }
    for (NodeId p : dag.parents(v)) {
      if (on_path[p]) continue;
      path.push_back(p);
      forward.push_back(false);
      on_path[p] = true;
      dfs(p);
      on_path[p] = false;
      path.pop_back();
      forward.pop_back();
    }
  };

  for (NodeId x : xs) {
    path = {x};
    forward.clear();
    std::fill(on_path.begin(), on_path.end(), false);
    on_path[x] = true;
    dfs(x);
    if (found_active) return false;
  }
  return true;
}

// All labeled DAGs on n nodes (3 states per unordered pair, acyclic kept).
inline std::vector<Dag> all_dags(int n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) pairs.push_back({a, b});
  std::vector<Dag> out;
  std::vector<int> state(pairs.size(), 0);
  while (true) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (state[i] == 1) edges.push_back({pairs[i].first, pairs[i].second});
      if (state[i] == 2) edges.push_back({pairs[i].second, pairs[i].first});
    }
    try {
      out.emplace_back(n, edges);
    } catch (const std::exception&) {
      // cyclic orientation; skip
    }
    std::size_t pos = 0;
    while (pos < state.size() && ++state[pos] == 3) state[pos++] = 0;
    if (pos == state.size()) break;
  }
  return out;
}

// All orderings of the dag where each node appears after its children,
// found by filtering every permutation.
inline std::vector<Ordering> rev_topo_by_filter(const Dag& dag) {
  Ordering perm = identity_ordering(dag.node_count());
  std::vector<Ordering> out;
  do {
    if (is_reverse_topological(dag, perm)) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Sum of joint entries consistent with partial evidence (-1 = free).
inline double submarginal(const JointTable& j, const std::vector<int>& evidence) {
  double total = 0.0;
  std::vector<int> assignment;
  for (std::size_t idx = 0; idx < j.p.size(); ++idx) {
    j.space.decode_into(idx, assignment);
    bool consistent = true;
    for (std::size_t k = 0; k < j.vars.size(); ++k) {
      NodeId var = j.vars[k];
      if (var < static_cast<int>(evidence.size()) && evidence[var] >= 0 &&
          evidence[var] != assignment[k])
        consistent = false;
    }
    if (consistent) total += j.p[idx];
  }
  return total;
}

// Every full assignment over the given variables of a circuit, as evidence
// vectors sized to the circuit's variable table.
inline std::vector<std::vector<int>> all_evidence(const Circuit& c,
                                                  const std::vector<NodeId>& vars) {
  std::vector<int> cards;
  for (NodeId v : vars) cards.push_back(c.var_cards[v]);
  AssignmentSpace space(cards);
  std::vector<std::vector<int>> out;
  std::vector<int> assignment;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    space.decode_into(idx, assignment);
    std::vector<int> evidence(c.var_cards.size(), -1);
    for (std::size_t k = 0; k < vars.size(); ++k) evidence[vars[k]] = assignment[k];
    out.push_back(std::move(evidence));
  }
  return out;
}

}  // namespace spnbn::testing

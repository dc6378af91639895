#include "spnbn/dag.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "spnbn/error.hpp"

namespace spnbn {

namespace {

// Kahn topological sort; empty result signals a cycle.
std::vector<NodeId> topological_sort(int n, const std::vector<std::vector<NodeId>>& children,
                                     const std::vector<std::vector<NodeId>>& parents) {
  std::vector<int> indeg(n);
  for (NodeId v = 0; v < n; ++v) indeg[v] = static_cast<int>(parents[v].size());
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId c : children[v])
      if (--indeg[c] == 0) ready.push(c);
  }
  if (static_cast<int>(order.size()) != n) order.clear();
  return order;
}

}  // namespace

Dag::Dag(int node_count) : node_count_(node_count) {
  if (node_count < 0) throw Error("dag: negative node count");
  rebuild();
}

Dag::Dag(int node_count, const std::vector<Edge>& edges) : node_count_(node_count) {
  if (node_count < 0) throw Error("dag: negative node count");
  for (const auto& [from, to] : edges) {
    check_node(from);
    check_node(to);
    if (from == to) throw Error("dag: self loop on node " + std::to_string(from));
    edges_.insert({from, to});
  }
  rebuild();
}

void Dag::check_node(NodeId v) const {
  if (v < 0 || v >= node_count_)
    throw Error("dag: node " + std::to_string(v) + " out of range [0, " +
                std::to_string(node_count_) + ")");
}

void Dag::rebuild() {
  parents_.assign(node_count_, {});
  children_.assign(node_count_, {});
  for (const auto& [from, to] : edges_) {
    children_[from].push_back(to);
    parents_[to].push_back(from);
  }
  // set iteration is sorted, so adjacency lists come out ascending
  if (topological_sort(node_count_, children_, parents_).empty() && node_count_ > 0)
    throw Error("dag: edge set contains a directed cycle");
}

bool Dag::has_edge(NodeId from, NodeId to) const { return edges_.count({from, to}) > 0; }

bool Dag::adjacent(NodeId a, NodeId b) const { return has_edge(a, b) || has_edge(b, a); }

const std::vector<NodeId>& Dag::parents(NodeId v) const {
  check_node(v);
  return parents_[v];
}

const std::vector<NodeId>& Dag::children(NodeId v) const {
  check_node(v);
  return children_[v];
}

std::vector<NodeId> Dag::ancestors(NodeId v) const {
  check_node(v);
  std::vector<bool> seen(node_count_, false);
  std::vector<NodeId> stack = parents_[v];
  std::vector<NodeId> out;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    for (NodeId p : parents_[u]) stack.push_back(p);
  }
  for (NodeId u = 0; u < node_count_; ++u)
    if (seen[u]) out.push_back(u);
  return out;
}

std::vector<NodeId> Dag::descendants(NodeId v) const {
  check_node(v);
  std::vector<bool> seen(node_count_, false);
  std::vector<NodeId> stack = children_[v];
  std::vector<NodeId> out;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    for (NodeId c : children_[u]) stack.push_back(c);
  }
  for (NodeId u = 0; u < node_count_; ++u)
    if (seen[u]) out.push_back(u);
  return out;
}

Dag Dag::with_edge(NodeId from, NodeId to) const {
  std::vector<Edge> all(edges_.begin(), edges_.end());
  all.push_back({from, to});
  return Dag(node_count_, all);
}

Dag Dag::with_edges(const std::set<Edge>& extra) const {
  std::vector<Edge> all(edges_.begin(), edges_.end());
  all.insert(all.end(), extra.begin(), extra.end());
  return Dag(node_count_, all);
}

Dag Dag::without_edge(NodeId from, NodeId to) const {
  if (!has_edge(from, to)) throw Error("dag: cannot remove missing edge");
  std::vector<Edge> all;
  for (const Edge& e : edges_)
    if (e != Edge{from, to}) all.push_back(e);
  return Dag(node_count_, all);
}

Relatives relatives(const Dag& dag, NodeId v) {
  Relatives r;
  r.parents = dag.parents(v);
  r.children = dag.children(v);
  r.ancestors = dag.ancestors(v);
  r.descendants = dag.descendants(v);
  return r;
}

std::vector<std::tuple<NodeId, NodeId, NodeId>> v_structures(const Dag& dag) {
  std::vector<std::tuple<NodeId, NodeId, NodeId>> out;
  for (NodeId c = 0; c < dag.node_count(); ++c) {
    const auto& ps = dag.parents(c);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (!dag.adjacent(ps[i], ps[j])) out.emplace_back(ps[i], c, ps[j]);
  }
  return out;
}

bool d_separated(const Dag& dag, const std::vector<NodeId>& x, const std::vector<NodeId>& z,
                 const std::vector<NodeId>& y) {
  const int n = dag.node_count();
  if (x.empty() || y.empty()) throw Error("d_separated: x and y must be nonempty");
  std::vector<int> role(n, 0);  // 1 = x, 2 = z, 3 = y
  auto mark = [&](const std::vector<NodeId>& set, int tag) {
    for (NodeId v : set) {
      if (v < 0 || v >= n) throw Error("d_separated: node out of range");
      if (role[v] != 0) throw Error("d_separated: input sets overlap");
      role[v] = tag;
    }
  };
  mark(x, 1);
  mark(z, 2);
  mark(y, 3);

  // nodes in z or with a descendant in z
  std::vector<bool> anc_z(n, false);
  {
    std::vector<NodeId> stack;
    for (NodeId v : z) {
      anc_z[v] = true;
      stack.push_back(v);
    }
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId p : dag.parents(v))
        if (!anc_z[p]) {
          anc_z[p] = true;
          stack.push_back(p);
        }
    }
  }

  // reachability over (node, direction) states; direction up = entered from a
  // child, down = entered from a parent
  std::vector<bool> visited_up(n, false), visited_down(n, false);
  std::vector<std::pair<NodeId, bool>> stack;  // bool: true = up
  for (NodeId v : x) stack.push_back({v, true});
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    auto& visited = up ? visited_up : visited_down;
    if (visited[v]) continue;
    visited[v] = true;
    if (role[v] == 3) return false;
    if (up) {
      if (role[v] != 2) {
        for (NodeId p : dag.parents(v)) stack.push_back({p, true});
        for (NodeId c : dag.children(v)) stack.push_back({c, false});
      }
    } else {
      if (role[v] != 2)
        for (NodeId c : dag.children(v)) stack.push_back({c, false});
      if (anc_z[v])
        for (NodeId p : dag.parents(v)) stack.push_back({p, true});
    }
  }
  return true;
}

bool is_topological(const Dag& dag, const Ordering& order) {
  const int n = dag.node_count();
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    if (order[i] < 0 || order[i] >= n || pos[order[i]] != -1) return false;
    pos[order[i]] = i;
  }
  for (const auto& [from, to] : dag.edges())
    if (pos[from] > pos[to]) return false;
  return true;
}

bool is_reverse_topological(const Dag& dag, const Ordering& order) {
  Ordering reversed(order.rbegin(), order.rend());
  return is_topological(dag, reversed);
}

namespace {

void enumerate_rev_topo(const Dag& dag, std::vector<bool>& emitted, Ordering& prefix,
                        std::vector<Ordering>& out) {
  const int n = dag.node_count();
  if (static_cast<int>(prefix.size()) == n) {
    out.push_back(prefix);
    return;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (emitted[v]) continue;
    bool ready = true;
    for (NodeId c : dag.children(v))
      if (!emitted[c]) {
        ready = false;
        break;
      }
    if (!ready) continue;
    emitted[v] = true;
    prefix.push_back(v);
    enumerate_rev_topo(dag, emitted, prefix, out);
    prefix.pop_back();
    emitted[v] = false;
  }
}

}  // namespace

std::vector<Ordering> reverse_topological_orderings(const Dag& dag) {
  std::vector<Ordering> out;
  std::vector<bool> emitted(dag.node_count(), false);
  Ordering prefix;
  enumerate_rev_topo(dag, emitted, prefix, out);
  return out;
}

Ordering first_reverse_topological(const Dag& dag) {
  const int n = dag.node_count();
  std::vector<bool> emitted(n, false);
  Ordering order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    NodeId pick = -1;
    for (NodeId v = 0; v < n && pick < 0; ++v) {
      if (emitted[v]) continue;
      bool ready = true;
      for (NodeId c : dag.children(v))
        if (!emitted[c]) ready = false;
      if (ready) pick = v;
    }
    if (pick < 0) throw InternalError("first_reverse_topological: no sink available");
    emitted[pick] = true;
    order.push_back(pick);
  }
  return order;
}

std::set<Edge> moralization_edges(const Dag& dag, const Ordering& prec) {
  if (!is_topological(dag, prec))
    throw Error("moralization_edges: prec is not a topological order of the dag");
  std::vector<int> pos(dag.node_count());
  for (int i = 0; i < static_cast<int>(prec.size()); ++i) pos[prec[i]] = i;
  std::set<Edge> out;
  for (NodeId c = 0; c < dag.node_count(); ++c) {
    const auto& ps = dag.parents(c);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        NodeId a = ps[i], b = ps[j];
        if (dag.adjacent(a, b)) continue;
        if (pos[a] > pos[b]) std::swap(a, b);
        out.insert({a, b});
      }
  }
  return out;
}

Dag moral_closure(const Dag& dag, const Ordering& prec) {
  Dag current = dag;
  while (true) {
    std::set<Edge> add = moralization_edges(current, prec);
    if (add.empty()) return current;
    current = current.with_edges(add);
  }
}

Ordering identity_ordering(int n) {
  Ordering order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  return order;
}

std::string dag_to_dot(const Dag& dag, const std::vector<std::string>& names) {
  auto label = [&](NodeId v) {
    if (v < static_cast<int>(names.size()) && !names[v].empty()) return names[v];
    return "v" + std::to_string(v);
  };
  std::ostringstream os;
  os << "digraph G {\n";
  for (NodeId v = 0; v < dag.node_count(); ++v)
    os << "  n" << v << " [label=\"" << label(v) << "\"];\n";
  for (const auto& [from, to] : dag.edges()) os << "  n" << from << " -> n" << to << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace spnbn

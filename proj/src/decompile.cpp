#include "spnbn/decompile.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "spnbn/error.hpp"
#include "spnbn/util.hpp"

namespace spnbn {

namespace {

std::vector<int> node_sum_depths(const Circuit& c) {
  std::vector<int> order = c.topo_order();  // children before parents
  std::vector<int> depth(c.size(), -1);
  depth[c.root()] = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int ref = *it;
    if (depth[ref] < 0) continue;
    const CircuitNode& n = c.node(ref);
    int below = depth[ref] + (n.kind == NodeKind::Sum ? 1 : 0);
    for (int child : n.children) depth[child] = std::max(depth[child], below);
  }
  return depth;
}

}  // namespace

int sum_depth(const Circuit& spn, int ref) {
  if (spn.node(ref).kind != NodeKind::Sum) throw Error("sum_depth: node is not a sum");
  return node_sum_depths(spn)[ref];
}

std::vector<std::vector<int>> sum_layers(const Circuit& spn) {
  std::vector<int> depth = node_sum_depths(spn);
  int max_depth = -1;
  for (int ref : spn.topo_order())
    if (spn.node(ref).kind == NodeKind::Sum) max_depth = std::max(max_depth, depth[ref]);
  std::vector<std::vector<int>> layers(max_depth + 1);
  for (int ref : spn.topo_order())
    if (spn.node(ref).kind == NodeKind::Sum) layers[depth[ref]].push_back(ref);
  for (auto& layer : layers) std::sort(layer.begin(), layer.end());
  layers.erase(std::remove_if(layers.begin(), layers.end(),
                              [](const std::vector<int>& l) { return l.empty(); }),
               layers.end());
  return layers;
}

LatentAssignment assign_latents(const Circuit& spn, RegionPolicy policy) {
  if (spn.stage != Stage::Spn) throw Error("assign_latents: circuit is not in spn stage");
  LatentAssignment out;
  out.node_latent.assign(spn.size(), -1);
  std::vector<std::uint64_t> scope = scopes(spn);
  std::map<std::uint64_t, int> latent_of_scope;       // per current layer or global
  std::map<std::uint64_t, int> first_layer_of_scope;  // for the cross-layer log

  int layer_index = 0;
  for (const auto& layer : sum_layers(spn)) {
    if (policy == RegionPolicy::LayerLocal) latent_of_scope.clear();
    std::map<std::uint64_t, int> region_of_scope;
    for (int ref : layer) {
      std::uint64_t sc = scope[ref];
      int child_count = static_cast<int>(spn.node(ref).children.size());

      auto seen = first_layer_of_scope.find(sc);
      if (seen == first_layer_of_scope.end())
        first_layer_of_scope.emplace(sc, layer_index);
      else if (seen->second != layer_index)
        out.scope_shared_across_layers = true;

      int latent;
      auto it = latent_of_scope.find(sc);
      if (it != latent_of_scope.end()) {
        latent = it->second;
        if (out.latents[latent].cardinality != child_count)
          throw Error("assign_latents: sums sharing scope disagree on child count (" +
                      std::to_string(out.latents[latent].cardinality) + " vs " +
                      std::to_string(child_count) + "); latent cardinality undefined");
      } else {
        latent = static_cast<int>(out.latents.size());
        out.latents.push_back(
            {static_cast<NodeId>(spn.var_cards.size()) + latent, child_count});
        latent_of_scope.emplace(sc, latent);
      }
      out.node_latent[ref] = latent;

      auto rit = region_of_scope.find(sc);
      if (rit == region_of_scope.end()) {
        region_of_scope.emplace(sc, static_cast<int>(out.regions.size()));
        out.regions.push_back({layer_index, sc, {ref}, latent});
      } else {
        out.regions[rit->second].members.push_back(ref);
      }
    }
    ++layer_index;
  }
  return out;
}

AugmentedCircuit augment(const Circuit& spn, const LatentAssignment& la) {
  AugmentedCircuit aug;
  aug.circuit = spn;
  aug.latents = la.latents;
  aug.regions = la.regions;
  aug.node_latent = la.node_latent;
  aug.original_size = spn.size();
  aug.original_var_count = static_cast<int>(spn.var_cards.size());
  aug.twin_of_latent.assign(la.latents.size(), -1);
  Circuit& c = aug.circuit;

  for (const LatentVar& lv : aug.latents) c.var_cards.push_back(lv.cardinality);

  // snapshot of the original topology; rewiring below must not shift it
  std::vector<std::vector<int>> snapshot(aug.original_size);
  std::vector<int> order = c.topo_order();
  for (int ref : order) snapshot[ref] = c.node(ref).children;

  const int latent_count = static_cast<int>(aug.latents.size());
  std::vector<std::vector<int>> members_of_latent(latent_count);
  for (const SumRegion& r : aug.regions)
    for (int m : r.members) members_of_latent[r.latent].push_back(m);
  for (auto& ms : members_of_latent) std::sort(ms.begin(), ms.end());

  // reach[l][ref]: subtree of ref (in the original circuit) holds a member of l
  std::vector<std::vector<char>> reach(latent_count,
                                       std::vector<char>(aug.original_size, 0));
  for (int l = 0; l < latent_count; ++l) {
    for (int m : members_of_latent[l]) reach[l][m] = 1;
    for (int ref : order) {
      if (reach[l][ref]) continue;
      for (int child : snapshot[ref])
        if (reach[l][child]) {
          reach[l][ref] = 1;
          break;
        }
    }
  }

  std::set<int> created_products;
  std::map<std::pair<int, int>, int> product_cache;  // (child, companion) -> product
  auto multiply_into_slot = [&](int owner, int slot, int companion) {
    int cur = c.node(owner).children[slot];
    if (created_products.count(cur)) {
      auto& kids = c.mutable_node(cur).children;
      if (std::find(kids.begin(), kids.end(), companion) == kids.end())
        kids.push_back(companion);
      return;
    }
    auto key = std::make_pair(cur, companion);
    auto it = product_cache.find(key);
    int product;
    if (it != product_cache.end()) {
      product = it->second;
    } else {
      product = c.add_product({cur, companion});
      product_cache.emplace(key, product);
      created_products.insert(product);
    }
    c.mutable_node(owner).children[slot] = product;
  };

  for (int l = 0; l < latent_count; ++l) {
    const LatentVar& lv = aug.latents[l];
    for (int member : members_of_latent[l])
      for (int k = 0; k < lv.cardinality; ++k)
        multiply_into_slot(member, k, c.add_indicator(lv.id, k));
  }

  for (int l = 0; l < latent_count; ++l) {
    const LatentVar& lv = aug.latents[l];
    for (int ref : order) {
      if (c.node(ref).kind != NodeKind::Sum || ref >= aug.original_size) continue;
      if (std::binary_search(members_of_latent[l].begin(), members_of_latent[l].end(), ref))
        continue;
      if (!reach[l][ref]) continue;  // not an ancestor of any member
      for (std::size_t k = 0; k < snapshot[ref].size(); ++k) {
        if (reach[l][snapshot[ref][k]]) continue;
        if (aug.twin_of_latent[l] < 0) {
          std::vector<int> inds;
          inds.reserve(lv.cardinality);
          for (int s = 0; s < lv.cardinality; ++s) inds.push_back(c.add_indicator(lv.id, s));
          std::vector<double> uniform(lv.cardinality, 1.0 / lv.cardinality);
          aug.twin_of_latent[l] = c.add_sum(std::move(inds), std::move(uniform));
        }
        multiply_into_slot(ref, static_cast<int>(k), aug.twin_of_latent[l]);
      }
    }
  }

  ValidityReport report = check_valid(c);
  if (!report.ok()) {
    std::string msg = "augment: augmented circuit is invalid:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw InternalError(msg);
  }
  return aug;
}

namespace {

// descendants-or-self indicator for target
std::vector<char> reaches(const Circuit& c, int target) {
  std::vector<char> reach(c.size(), 0);
  if (target >= 0) reach[target] = 1;
  for (int ref : c.topo_order()) {
    if (reach[ref]) continue;
    for (int child : c.node(ref).children)
      if (reach[child]) {
        reach[ref] = 1;
        break;
      }
  }
  return reach;
}

bool is_observable_leaf(const AugmentedCircuit& aug, int ref) {
  const CircuitNode& n = aug.circuit.node(ref);
  if (n.kind == NodeKind::Terminal) return n.var < aug.original_var_count;
  if (n.kind == NodeKind::Indicator) return n.var < aug.original_var_count;
  return false;
}

}  // namespace

std::vector<int> conditioning_ancestors(const AugmentedCircuit& aug, int ref) {
  const Circuit& c = aug.circuit;
  const CircuitNode& n = c.node(ref);
  int twin = -1;
  if (n.kind == NodeKind::Sum) {
    if (ref >= aug.original_size || aug.node_latent[ref] < 0)
      throw Error("conditioning_ancestors: sum is not a region member");
    twin = aug.twin_of_latent[aug.node_latent[ref]];
  } else if (!is_observable_leaf(aug, ref)) {
    throw Error("conditioning_ancestors: node is neither a member sum nor an observable leaf");
  }

  std::vector<char> reach_n = reaches(c, ref);
  std::vector<char> reach_t = twin >= 0 ? reaches(c, twin) : std::vector<char>(c.size(), 0);

  std::vector<int> out;
  for (int a : c.topo_order()) {
    if (a == ref || c.node(a).kind != NodeKind::Sum || !reach_n[a]) continue;
    const auto& kids = c.node(a).children;
    int first = reach_n[kids[0]] | (reach_t[kids[0]] << 1);
    bool equal = true;
    for (int child : kids)
      if ((reach_n[child] | (reach_t[child] << 1)) != first) {
        equal = false;
        break;
      }
    if (!equal) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DecompiledBn build_imap(const AugmentedCircuit& aug) {
  const Circuit& c = aug.circuit;
  DecompiledBn out;

  std::vector<NodeId> observables;
  for (int ref : c.topo_order())
    if (is_observable_leaf(aug, ref)) observables.push_back(c.node(ref).var);
  std::sort(observables.begin(), observables.end());
  observables.erase(std::unique(observables.begin(), observables.end()), observables.end());

  const int latent_count = static_cast<int>(aug.latents.size());
  out.bnnode_of_latent.resize(latent_count);
  for (int l = 0; l < latent_count; ++l) {
    out.bnnode_of_latent[l] = static_cast<int>(out.bn.variables.size());
    out.latent_of_bnnode.push_back(l);
    out.var_of_bnnode.push_back(-1);
    out.bn.variables.push_back({"Z" + std::to_string(l + 1), aug.latents[l].cardinality,
                                Variable::Kind::Latent});
  }
  for (NodeId v : observables) {
    out.bnnode_of_var[v] = static_cast<int>(out.bn.variables.size());
    out.latent_of_bnnode.push_back(-1);
    out.var_of_bnnode.push_back(v);
    out.bn.variables.push_back({"X" + std::to_string(v + 1), c.var_cards[v],
                                Variable::Kind::Observable});
  }

  std::set<Edge> edges;
  auto add_edges_for = [&](int ref, int target_bnnode) {
    for (int a : conditioning_ancestors(aug, ref)) {
      int la = aug.node_latent[a];
      if (la < 0) throw InternalError("build_imap: conditioning ancestor without a latent");
      int src = out.bnnode_of_latent[la];
      if (src == target_bnnode)
        throw InternalError(
            "build_imap: latent conditions itself (scope shared across layers)");
      edges.insert({src, target_bnnode});
    }
  };
  for (const SumRegion& r : aug.regions)
    for (int m : r.members) add_edges_for(m, out.bnnode_of_latent[r.latent]);
  for (int ref : c.topo_order())
    if (is_observable_leaf(aug, ref)) add_edges_for(ref, out.bnnode_of_var[c.node(ref).var]);

  try {
    out.bn.dag = Dag(static_cast<int>(out.bn.variables.size()),
                     std::vector<Edge>(edges.begin(), edges.end()));
  } catch (const Error& e) {
    throw InternalError(std::string("build_imap: cyclic I-map: ") + e.what());
  }
  return out;
}

namespace {

// Nodes reachable when every member sum of an assigned latent is restricted
// to its assigned child.
std::vector<char> active_nodes(const AugmentedCircuit& aug,
                               const std::vector<int>& latent_state) {
  const Circuit& c = aug.circuit;
  std::vector<char> active(c.size(), 0);
  std::vector<int> stack = {c.root()};
  while (!stack.empty()) {
    int ref = stack.back();
    stack.pop_back();
    if (active[ref]) continue;
    active[ref] = 1;
    const CircuitNode& n = c.node(ref);
    int latent = ref < aug.original_size ? aug.node_latent[ref] : -1;
    if (n.kind == NodeKind::Sum && latent >= 0 && latent_state[latent] >= 0) {
      stack.push_back(n.children[latent_state[latent]]);
    } else {
      for (int child : n.children) stack.push_back(child);
    }
  }
  return active;
}

bool rows_agree(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

}  // namespace

void extract_cpts(const AugmentedCircuit& aug, DecompiledBn& out) {
  const Circuit& c = aug.circuit;
  const int bn_size = static_cast<int>(out.bn.variables.size());
  out.bn.cpts.assign(bn_size, {});

  std::vector<std::vector<int>> members_of_latent(aug.latents.size());
  for (const SumRegion& r : aug.regions)
    for (int m : r.members) members_of_latent[r.latent].push_back(m);

  for (int node = 0; node < bn_size; ++node) {
    Cpt& cpt = out.bn.cpts[node];
    cpt.child = node;
    cpt.parents = out.bn.dag.parents(node);
    std::vector<int> parent_cards;
    for (int p : cpt.parents) {
      if (out.latent_of_bnnode[p] < 0)
        throw InternalError("extract_cpts: observable BN parent");
      parent_cards.push_back(out.bn.variables[p].cardinality);
    }
    AssignmentSpace rows(parent_cards);
    const int card = out.bn.variables[node].cardinality;
    cpt.table.assign(rows.size(), {});

    std::vector<int> assignment;
    for (std::size_t row = 0; row < rows.size(); ++row) {
      rows.decode_into(row, assignment);
      std::vector<int> latent_state(aug.latents.size(), -1);
      for (std::size_t k = 0; k < cpt.parents.size(); ++k)
        latent_state[out.latent_of_bnnode[cpt.parents[k]]] = assignment[k];
      std::vector<char> active = active_nodes(aug, latent_state);

      std::vector<double> picked;
      auto consider = [&](const std::vector<double>& candidate) {
        if (picked.empty())
          picked = candidate;
        else if (!rows_agree(picked, candidate))
          throw InternalError("extract_cpts: parent assignment selects disagreeing rows for '" +
                              out.bn.variables[node].name + "'");
      };

      int latent = out.latent_of_bnnode[node];
      if (latent >= 0) {
        for (int m : members_of_latent[latent])
          if (active[m]) consider(c.node(m).weights);
      } else {
        NodeId var = out.var_of_bnnode[node];
        for (int ref : c.topo_order()) {
          if (!active[ref] || !is_observable_leaf(aug, ref) || c.node(ref).var != var) continue;
          const CircuitNode& leaf = c.node(ref);
          if (leaf.kind == NodeKind::Terminal) {
            consider(leaf.dist);
          } else {
            std::vector<double> onehot(card, 0.0);
            onehot[leaf.state] = 1.0;
            consider(onehot);
          }
        }
      }
      if (picked.empty()) picked.assign(card, 1.0 / card);
      cpt.table[row] = std::move(picked);
    }
  }
  out.bn.validate();
}

DecompiledBn spn2bn(const Circuit& spn, RegionPolicy policy) {
  return decompile(spn, policy).result;
}

Decompilation decompile(const Circuit& spn, RegionPolicy policy) {
  ValidityReport report = check_valid(spn);
  if (!report.complete || !report.decomposable)
    throw Error("decompile: input circuit is not a valid (complete, decomposable) spn");
  Decompilation d;
  d.assignment = assign_latents(spn, policy);
  d.aug = augment(spn, d.assignment);
  d.result = build_imap(d.aug);
  extract_cpts(d.aug, d.result);
  return d;
}

JointTable augmented_joint(const AugmentedCircuit& aug, std::size_t cap) {
  const Circuit& c = aug.circuit;
  JointTable j;
  j.vars = scope_vars(scope_of(c, c.root()));
  std::vector<int> cards;
  for (NodeId v : j.vars) cards.push_back(c.var_cards[v]);
  j.space = AssignmentSpace(cards);
  if (j.space.size() > cap)
    throw Error("augmented_joint: assignment space " + std::to_string(j.space.size()) +
                " exceeds cap");
  j.p.resize(j.space.size());
  std::vector<int> assignment;
  std::vector<int> evidence(c.var_cards.size(), -1);
  for (std::size_t idx = 0; idx < j.p.size(); ++idx) {
    j.space.decode_into(idx, assignment);
    std::fill(evidence.begin(), evidence.end(), -1);
    for (std::size_t k = 0; k < j.vars.size(); ++k) evidence[j.vars[k]] = assignment[k];
    j.p[idx] = evaluate(c, evidence);
  }
  return j;
}

}  // namespace spnbn

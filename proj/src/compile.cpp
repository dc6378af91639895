#include "spnbn/compile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spnbn/error.hpp"
#include "spnbn/util.hpp"

namespace spnbn {

namespace {

struct Factor {
  NodeId tag;                // variable whose elimination (or CPT) created it
  std::vector<NodeId> vars;  // ascending
  std::vector<int> entries;  // refs, indexed by AssignmentSpace over vars
};

// Skeleton for the bottom-up rewrites: walks reachable nodes children-first,
// lets `fn(old_ref, node, remap, out)` produce the replacement ref, and
// carries root, stage, cards and provenance over.
template <typename Fn>
Circuit rebuild_raw(const Circuit& src, Fn&& fn) {
  Circuit out;
  out.stage = src.stage;
  out.var_cards = src.var_cards;
  std::vector<int> remap(src.size(), -1);
  for (int ref : src.topo_order()) remap[ref] = fn(ref, src.node(ref), remap, out);
  if (remap[src.root()] < 0) throw InternalError("rebuild: root vanished");
  out.set_root(remap[src.root()]);
  for (const auto& [ref, var] : src.provenance) {
    int nref = remap[ref];
    if (nref >= 0 && out.node(nref).kind == NodeKind::Sum) out.provenance[nref] = var;
  }
  return out;
}

int copy_leaf(const CircuitNode& n, Circuit& out);

// Identity rebuild; drops nodes no longer reachable from the root.
Circuit compact(const Circuit& src) {
  return rebuild_raw(src, [](int, const CircuitNode& n, const std::vector<int>& remap,
                             Circuit& dst) -> int {
    std::vector<int> children;
    children.reserve(n.children.size());
    for (int c : n.children) children.push_back(remap[c]);
    if (n.kind == NodeKind::Sum) return dst.add_sum(std::move(children), n.weights);
    if (n.kind == NodeKind::Product) return dst.add_product(std::move(children));
    return copy_leaf(n, dst);
  });
}

template <typename Fn>
Circuit rebuild(const Circuit& src, Fn&& fn) {
  return compact(rebuild_raw(src, fn));
}

int copy_leaf(const CircuitNode& n, Circuit& out) {
  switch (n.kind) {
    case NodeKind::One:
      return out.add_one();
    case NodeKind::Param:
      return out.add_param(n.value);
    case NodeKind::Indicator:
      return out.add_indicator(n.var, n.state);
    case NodeKind::Terminal:
      return out.add_terminal(n.var, n.dist);
    default:
      throw InternalError("copy_leaf: not a leaf");
  }
}

std::vector<int> remap_children(const CircuitNode& n, const std::vector<int>& remap) {
  std::vector<int> children;
  children.reserve(n.children.size());
  for (int c : n.children) {
    if (remap[c] < 0) throw InternalError("rebuild: child vanished");
    children.push_back(remap[c]);
  }
  return children;
}

Circuit flatten_impl(const Circuit& src, bool* changed) {
  bool fired = false;
  Circuit out = rebuild(src, [&](int, const CircuitNode& n, const std::vector<int>& remap,
                                 Circuit& dst) {
    if (n.kind == NodeKind::Sum) return dst.add_sum(remap_children(n, remap), n.weights);
    if (n.kind != NodeKind::Product) return copy_leaf(n, dst);
    std::vector<int> children;
    for (int c : n.children) {
      int nc = remap[c];
      if (dst.node(nc).kind == NodeKind::Product) {
        const auto& sub = dst.node(nc).children;
        children.insert(children.end(), sub.begin(), sub.end());
        fired = true;
      } else {
        children.push_back(nc);
      }
    }
    if (children.size() == 1) {
      fired = true;
      return children[0];
    }
    return dst.add_product(std::move(children));
  });
  if (changed) *changed = fired;
  return out;
}

}  // namespace

Circuit compile_to_ac(const BayesNet& bn, const Ordering& sigma) {
  bn.validate();
  const int n = bn.size();
  if (n == 0) throw Error("compile_to_ac: empty network");
  {
    std::vector<bool> seen(n, false);
    if (static_cast<int>(sigma.size()) != n) throw Error("compile_to_ac: sigma size mismatch");
    for (NodeId v : sigma) {
      if (v < 0 || v >= n || seen[v]) throw Error("compile_to_ac: sigma is not a permutation");
      seen[v] = true;
    }
  }

  Circuit c;
  c.stage = Stage::Ac;
  c.var_cards = bn.cards();

  std::vector<Factor> factors;
  factors.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    Factor f;
    f.tag = v;
    f.vars = bn.dag.parents(v);
    f.vars.push_back(v);
    std::sort(f.vars.begin(), f.vars.end());
    std::vector<int> cards;
    for (NodeId u : f.vars) cards.push_back(bn.card(u));
    AssignmentSpace space(cards);
    f.entries.resize(space.size());
    const Cpt& cpt = bn.cpts[v];
    std::vector<int> assignment;
    for (std::size_t idx = 0; idx < space.size(); ++idx) {
      space.decode_into(idx, assignment);
      std::size_t row = 0;
      int child_state = 0;
      for (std::size_t k = 0; k < f.vars.size(); ++k)
        if (f.vars[k] == v) child_state = assignment[k];
      for (NodeId parent : cpt.parents) {
        auto it = std::lower_bound(f.vars.begin(), f.vars.end(), parent);
        row = row * bn.card(parent) + assignment[it - f.vars.begin()];
      }
      double theta = cpt.table[row][child_state];
      f.entries[idx] = c.add_product({c.add_param(theta), c.add_indicator(v, child_state)});
    }
    factors.push_back(std::move(f));
  }

  for (NodeId x : sigma) {
    std::vector<Factor> sel;
    std::vector<Factor> rest;
    for (Factor& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), x))
        sel.push_back(std::move(f));
      else
        rest.push_back(std::move(f));
    }
    std::sort(sel.begin(), sel.end(), [](const Factor& a, const Factor& b) { return a.tag < b.tag; });
    if (sel.empty()) throw InternalError("compile_to_ac: no factor mentions " + std::to_string(x));

    std::vector<NodeId> merged_vars;
    for (const Factor& f : sel) merged_vars.insert(merged_vars.end(), f.vars.begin(), f.vars.end());
    std::sort(merged_vars.begin(), merged_vars.end());
    merged_vars.erase(std::unique(merged_vars.begin(), merged_vars.end()), merged_vars.end());

    Factor result;
    result.tag = x;
    for (NodeId v : merged_vars)
      if (v != x) result.vars.push_back(v);

    std::vector<int> out_cards;
    for (NodeId v : result.vars) out_cards.push_back(bn.card(v));
    AssignmentSpace out_space(out_cards);

    // per-factor positions of its vars inside the merged assignment
    std::vector<int> value(n, 0);
    result.entries.resize(out_space.size());
    std::vector<int> out_assignment;
    std::vector<int> restricted;
    for (std::size_t oidx = 0; oidx < out_space.size(); ++oidx) {
      out_space.decode_into(oidx, out_assignment);
      for (std::size_t k = 0; k < result.vars.size(); ++k) value[result.vars[k]] = out_assignment[k];
      std::vector<int> sum_children;
      sum_children.reserve(bn.card(x));
      for (int state = 0; state < bn.card(x); ++state) {
        value[x] = state;
        std::vector<int> product_children;
        product_children.reserve(sel.size());
        for (const Factor& f : sel) {
          std::size_t fidx = 0;
          for (NodeId v : f.vars) fidx = fidx * bn.card(v) + value[v];
          product_children.push_back(f.entries[fidx]);
        }
        sum_children.push_back(product_children.size() == 1
                                   ? product_children[0]
                                   : c.add_product(std::move(product_children)));
      }
      int sum = c.add_unit_sum(std::move(sum_children));
      c.provenance[sum] = x;
      result.entries[oidx] = sum;
    }
    rest.push_back(std::move(result));
    factors = std::move(rest);
  }

  std::sort(factors.begin(), factors.end(),
            [](const Factor& a, const Factor& b) { return a.tag < b.tag; });
  if (factors.size() == 1) {
    c.set_root(factors[0].entries[0]);
  } else {
    std::vector<int> roots;
    for (const Factor& f : factors) roots.push_back(f.entries[0]);
    c.set_root(c.add_product(std::move(roots)));
  }
  return c;
}

Circuit redistribute_parameters(const Circuit& ac, CompileStats* stats) {
  if (ac.stage != Stage::Ac) throw Error("redistribute_parameters: circuit is not in ac stage");
  Circuit flat = flatten_impl(ac, nullptr);

  int renormalized = 0;
  // mu[old ref] = multiplier the parent edge must absorb so that values are
  // preserved after folding params and normalizing sums
  std::vector<double> mu(flat.size(), 1.0);
  Circuit out = rebuild(flat, [&](int ref, const CircuitNode& n, const std::vector<int>& remap,
                                  Circuit& dst) -> int {
    switch (n.kind) {
      case NodeKind::Param:
        mu[ref] = n.value;
        return -2;  // dies; only products may reference it
      case NodeKind::One:
      case NodeKind::Indicator:
      case NodeKind::Terminal:
        return copy_leaf(n, dst);
      case NodeKind::Product: {
        double factor = 1.0;
        std::vector<int> children;
        for (int c : n.children) {
          factor *= mu[c];
          if (remap[c] >= 0) children.push_back(remap[c]);
        }
        mu[ref] = factor;
        if (children.empty())
          throw InternalError("redistribute_parameters: product had only param children");
        if (children.size() == 1) return children[0];
        return dst.add_product(std::move(children));
      }
      case NodeKind::Sum: {
        std::vector<int> children;
        std::vector<double> weights;
        double mass = 0.0;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          int c = n.children[i];
          if (remap[c] < 0)
            throw Error("redistribute_parameters: bare param under a sum (malformed AC)");
          children.push_back(remap[c]);
          weights.push_back(n.weights[i] * mu[c]);
          mass += weights.back();
        }
        if (std::abs(mass - 1.0) > 1e-9) {
          if (mass <= 0.0)
            throw Error("redistribute_parameters: sum collapsed to zero mass");
          for (double& w : weights) w /= mass;
          mu[ref] = mass;
          ++renormalized;
        }
        return dst.add_sum(std::move(children), std::move(weights));
      }
    }
    throw InternalError("redistribute_parameters: unhandled node kind");
  });

  double root_mu = mu[flat.root()];
  if (std::abs(root_mu - 1.0) > 1e-9)
    throw InternalError("redistribute_parameters: root mass " + std::to_string(root_mu));
  if (stats) stats->renormalized_sums += renormalized;
  out.stage = Stage::Spn;
  return out;
}

Circuit marginalize(const Circuit& spn, const std::set<NodeId>& vars) {
  if (spn.stage != Stage::Spn) throw Error("marginalize: circuit is not in spn stage");
  std::uint64_t root_scope = scope_of(spn, spn.root());
  for (NodeId v : vars)
    if (v < 0 || v >= 64 || !(root_scope >> v & 1))
      throw Error("marginalize: variable " + std::to_string(v) + " not in the root scope");

  return rebuild(spn, [&](int, const CircuitNode& n, const std::vector<int>& remap,
                          Circuit& dst) -> int {
    auto is_one = [&](int ref) { return dst.node(ref).kind == NodeKind::One; };
    switch (n.kind) {
      case NodeKind::Indicator:
        if (vars.count(n.var)) return dst.add_one();
        return dst.add_indicator(n.var, n.state);
      case NodeKind::Product: {
        std::vector<int> children;
        for (int c : n.children)
          if (!is_one(remap[c])) children.push_back(remap[c]);
        if (children.empty()) return dst.add_one();
        if (children.size() == 1) return children[0];
        return dst.add_product(std::move(children));
      }
      case NodeKind::Sum: {
        std::vector<int> children = remap_children(n, remap);
        bool all_one = true;
        for (int c : children)
          if (!is_one(c)) all_one = false;
        if (all_one) return dst.add_one();
        return dst.add_sum(std::move(children), n.weights);
      }
      default:
        return copy_leaf(n, dst);
    }
  });
}

Circuit add_terminal_nodes(const Circuit& spn, bool* changed) {
  if (spn.stage != Stage::Spn) throw Error("add_terminal_nodes: circuit is not in spn stage");
  bool fired = false;
  Circuit out = rebuild(spn, [&](int ref, const CircuitNode& n, const std::vector<int>& remap,
                                 Circuit& dst) -> int {
    if (n.kind == NodeKind::Product) return dst.add_product(remap_children(n, remap));
    if (n.kind != NodeKind::Sum) return copy_leaf(n, dst);
    std::vector<int> children = remap_children(n, remap);
    bool all_indicators = true;
    for (int c : children)
      if (dst.node(c).kind != NodeKind::Indicator) all_indicators = false;
    if (!all_indicators || children.empty()) return dst.add_sum(std::move(children), n.weights);
    NodeId var = dst.node(children[0]).var;
    for (int c : children)
      if (dst.node(c).var != var)
        throw Error("add_terminal_nodes: sum " + std::to_string(ref) +
                    " mixes indicators of different variables (incomplete circuit)");
    if (var >= static_cast<int>(dst.var_cards.size()) || dst.var_cards[var] < 1)
      throw InternalError("add_terminal_nodes: unknown cardinality for variable " +
                          std::to_string(var));
    std::vector<double> dist(dst.var_cards[var], 0.0);
    for (std::size_t i = 0; i < children.size(); ++i)
      dist[dst.node(children[i]).state] += n.weights[i];
    fired = true;
    return dst.add_terminal(var, std::move(dist));
  });
  if (changed) *changed = fired;
  return out;
}

Circuit flatten_products(const Circuit& spn, bool* changed) {
  if (spn.stage != Stage::Spn) throw Error("flatten_products: circuit is not in spn stage");
  return flatten_impl(spn, changed);
}

Circuit lump_products(const Circuit& spn, bool* changed) {
  if (spn.stage != Stage::Spn) throw Error("lump_products: circuit is not in spn stage");
  bool fired = false;
  std::map<std::vector<int>, int> seen;
  Circuit out = rebuild(spn, [&](int, const CircuitNode& n, const std::vector<int>& remap,
                                 Circuit& dst) -> int {
    if (n.kind == NodeKind::Sum) return dst.add_sum(remap_children(n, remap), n.weights);
    if (n.kind != NodeKind::Product) return copy_leaf(n, dst);
    std::vector<int> children = remap_children(n, remap);
    std::vector<int> key = children;
    std::sort(key.begin(), key.end());
    auto it = seen.find(key);
    if (it != seen.end()) {
      fired = true;
      return it->second;
    }
    int ref = dst.add_product(std::move(children));
    seen.emplace(std::move(key), ref);
    return ref;
  });
  if (changed) *changed = fired;
  return out;
}

Circuit simplify_fixpoint(const Circuit& spn) {
  Circuit current = spn;
  for (int pass = 0; pass < 1000; ++pass) {
    bool t = false, f = false, l = false;
    Circuit next = lump_products(flatten_products(add_terminal_nodes(current, &t), &f), &l);
    if (!t && !f && !l) {
      if (fingerprint(next) != fingerprint(current))
        throw InternalError("simplify_fixpoint: no rewrite fired but fingerprint changed");
      return next;
    }
    current = std::move(next);
  }
  throw InternalError("simplify_fixpoint: did not converge within 1000 passes");
}

Circuit bn2spn(const BayesNet& bn, const Ordering& sigma, const std::set<NodeId>& marg,
               CompileStats* stats) {
  Circuit ac = compile_to_ac(bn, sigma);
  Circuit spn = redistribute_parameters(ac, stats);
  spn = marginalize(spn, marg);
  spn = simplify_fixpoint(spn);
  ValidityReport report = check_valid(spn);
  if (!report.ok()) {
    std::string msg = "bn2spn: output circuit is invalid:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw InternalError(msg);
  }
  return spn;
}

}  // namespace spnbn

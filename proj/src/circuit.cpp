#include "spnbn/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spnbn/error.hpp"
#include "spnbn/util.hpp"

namespace spnbn {

void Circuit::check_ref(int ref) const {
  if (ref < 0 || ref >= size()) throw Error("circuit: dangling node ref " + std::to_string(ref));
}

int Circuit::add_indicator(NodeId var, int state) {
  if (var < 0 || state < 0) throw Error("circuit: indicator needs nonnegative var and state");
  auto key = std::make_pair(var, state);
  auto it = indicator_index_.find(key);
  if (it != indicator_index_.end()) return it->second;
  CircuitNode n;
  n.kind = NodeKind::Indicator;
  n.var = var;
  n.state = state;
  nodes_.push_back(std::move(n));
  int ref = size() - 1;
  indicator_index_[key] = ref;
  return ref;
}

int Circuit::add_param(double value) {
  CircuitNode n;
  n.kind = NodeKind::Param;
  n.value = value;
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Circuit::add_one() {
  if (one_ref_ >= 0) return one_ref_;
  CircuitNode n;
  n.kind = NodeKind::One;
  nodes_.push_back(std::move(n));
  one_ref_ = size() - 1;
  return one_ref_;
}

int Circuit::add_terminal(NodeId var, std::vector<double> dist) {
  CircuitNode n;
  n.kind = NodeKind::Terminal;
  n.var = var;
  n.dist = std::move(dist);
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Circuit::add_sum(std::vector<int> children, std::vector<double> weights) {
  if (children.size() != weights.size()) throw Error("circuit: sum children/weights mismatch");
  if (children.empty()) throw Error("circuit: sum needs at least one child");
  for (int c : children) check_ref(c);
  for (double w : weights)
    if (w < 0.0) throw Error("circuit: negative sum weight");
  CircuitNode n;
  n.kind = NodeKind::Sum;
  n.children = std::move(children);
  n.weights = std::move(weights);
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Circuit::add_unit_sum(std::vector<int> children) {
  std::vector<double> weights(children.size(), 1.0);
  return add_sum(std::move(children), std::move(weights));
}

int Circuit::add_product(std::vector<int> children) {
  if (children.empty()) throw Error("circuit: product needs at least one child");
  for (int c : children) check_ref(c);
  CircuitNode n;
  n.kind = NodeKind::Product;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  return size() - 1;
}

const CircuitNode& Circuit::node(int ref) const {
  check_ref(ref);
  return nodes_[ref];
}

CircuitNode& Circuit::mutable_node(int ref) {
  check_ref(ref);
  return nodes_[ref];
}

void Circuit::set_root(int ref) {
  check_ref(ref);
  root_ = ref;
}

std::vector<int> Circuit::topo_order() const {
  if (root_ < 0) throw Error("circuit: no root set");
  std::vector<int> order;
  order.reserve(nodes_.size());
  std::vector<int> state(nodes_.size(), 0);  // 0 new, 1 open, 2 done
  std::vector<int> stack = {root_};
  while (!stack.empty()) {
    int ref = stack.back();
    if (state[ref] == 2) {
      stack.pop_back();
      continue;
    }
    if (state[ref] == 1) {
      state[ref] = 2;
      order.push_back(ref);
      stack.pop_back();
      continue;
    }
    state[ref] = 1;
    for (int c : nodes_[ref].children)
      if (state[c] == 0) stack.push_back(c);
  }
  return order;
}

std::vector<std::vector<int>> Circuit::parent_lists() const {
  std::vector<std::vector<int>> parents(nodes_.size());
  for (int ref : topo_order())
    for (int c : nodes_[ref].children) parents[c].push_back(ref);
  return parents;
}

int Circuit::reachable_count() const { return static_cast<int>(topo_order().size()); }

std::vector<std::uint64_t> scopes(const Circuit& c) {
  std::vector<std::uint64_t> scope(c.size(), 0);
  for (int ref : c.topo_order()) {
    const CircuitNode& n = c.node(ref);
    switch (n.kind) {
      case NodeKind::Indicator:
      case NodeKind::Terminal:
        if (n.var >= 64) throw Error("scopes: variable ids above 63 are not supported");
        scope[ref] = std::uint64_t{1} << n.var;
        break;
      case NodeKind::Param:
      case NodeKind::One:
        scope[ref] = 0;
        break;
      case NodeKind::Sum:
      case NodeKind::Product:
        for (int child : n.children) scope[ref] |= scope[child];
        break;
    }
  }
  return scope;
}

std::uint64_t scope_of(const Circuit& c, int ref) {
  c.node(ref);
  return scopes(c)[ref];
}

std::vector<NodeId> scope_vars(std::uint64_t mask) {
  std::vector<NodeId> out;
  for (int v = 0; v < 64; ++v)
    if (mask >> v & 1) out.push_back(v);
  return out;
}

ValidityReport check_valid(const Circuit& c) {
  if (c.stage != Stage::Spn) throw Error("check_valid: circuit is not in spn stage");
  ValidityReport report;
  std::vector<std::uint64_t> scope = scopes(c);
  for (int ref : c.topo_order()) {
    const CircuitNode& n = c.node(ref);
    if (n.kind == NodeKind::Param)
      report.violations.push_back("param node " + std::to_string(ref) + " in spn stage");
    if (n.kind == NodeKind::One && ref != c.root())
      report.violations.push_back("interior one node " + std::to_string(ref));
    if (n.kind == NodeKind::Sum) {
      double mass = 0.0;
      for (double w : n.weights) mass += w;
      if (std::abs(mass - 1.0) > 1e-9)
        report.violations.push_back("sum " + std::to_string(ref) + " weights total " +
                                    std::to_string(mass));
      for (std::size_t i = 1; i < n.children.size(); ++i)
        if (scope[n.children[i]] != scope[n.children[0]]) {
          report.complete = false;
          report.violations.push_back("sum " + std::to_string(ref) + " is incomplete");
          break;
        }
    }
    if (n.kind == NodeKind::Product) {
      std::uint64_t seen = 0;
      for (int child : n.children) {
        if (seen & scope[child]) {
          report.decomposable = false;
          report.violations.push_back("product " + std::to_string(ref) + " is not decomposable");
          break;
        }
        seen |= scope[child];
      }
    }
    if (n.kind == NodeKind::Terminal) {
      double mass = 0.0;
      for (double d : n.dist) mass += d;
      if (std::abs(mass - 1.0) > 1e-9)
        report.violations.push_back("terminal " + std::to_string(ref) + " distribution total " +
                                    std::to_string(mass));
    }
  }
  return report;
}

double evaluate(const Circuit& c, const std::vector<int>& evidence) {
  auto observed = [&](NodeId var) {
    return var < static_cast<int>(evidence.size()) ? evidence[var] : -1;
  };
  std::vector<double> value(c.size(), 0.0);
  for (int ref : c.topo_order()) {
    const CircuitNode& n = c.node(ref);
    switch (n.kind) {
      case NodeKind::One:
        value[ref] = 1.0;
        break;
      case NodeKind::Param:
        value[ref] = n.value;
        break;
      case NodeKind::Indicator: {
        int obs = observed(n.var);
        if (obs >= 0 && n.var < static_cast<int>(c.var_cards.size()) && obs >= c.var_cards[n.var])
          throw Error("evaluate: state out of range for variable " + std::to_string(n.var));
        value[ref] = (obs < 0 || obs == n.state) ? 1.0 : 0.0;
        break;
      }
      case NodeKind::Terminal: {
        int obs = observed(n.var);
        if (obs >= static_cast<int>(n.dist.size()))
          throw Error("evaluate: state out of range for variable " + std::to_string(n.var));
        value[ref] = obs < 0 ? 1.0 : n.dist[obs];
        break;
      }
      case NodeKind::Sum: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n.children.size(); ++i)
          acc += n.weights[i] * value[n.children[i]];
        value[ref] = acc;
        break;
      }
      case NodeKind::Product: {
        double acc = 1.0;
        for (int child : n.children) acc *= value[child];
        value[ref] = acc;
        break;
      }
    }
  }
  return value[c.root()];
}

std::uint64_t fingerprint(const Circuit& c) {
  std::vector<std::uint64_t> h(c.size(), 0);
  for (int ref : c.topo_order()) {
    const CircuitNode& n = c.node(ref);
    std::uint64_t acc = 0;
    switch (n.kind) {
      case NodeKind::One:
        acc = mix64(0x10);
        break;
      case NodeKind::Param:
        acc = hash_combine(0x20, static_cast<std::uint64_t>(quantize_weight(n.value)));
        break;
      case NodeKind::Indicator:
        acc = hash_combine(hash_combine(0x30, n.var), n.state);
        break;
      case NodeKind::Terminal:
        acc = hash_combine(0x40, n.var);
        for (double d : n.dist) acc = hash_combine(acc, static_cast<std::uint64_t>(quantize_weight(d)));
        break;
      case NodeKind::Product: {
        std::vector<std::uint64_t> child_hashes;
        child_hashes.reserve(n.children.size());
        for (int child : n.children) child_hashes.push_back(h[child]);
        std::sort(child_hashes.begin(), child_hashes.end());
        acc = 0x50;
        for (std::uint64_t ch : child_hashes) acc = hash_combine(acc, ch);
        break;
      }
      case NodeKind::Sum: {
        std::vector<std::pair<std::uint64_t, std::int64_t>> entries;
        entries.reserve(n.children.size());
        for (std::size_t i = 0; i < n.children.size(); ++i)
          entries.push_back({h[n.children[i]], quantize_weight(n.weights[i])});
        std::sort(entries.begin(), entries.end());
        acc = 0x60;
        for (const auto& [ch, w] : entries)
          acc = hash_combine(hash_combine(acc, ch), static_cast<std::uint64_t>(w));
        break;
      }
    }
    h[ref] = acc;
  }
  return h[c.root()];
}

std::string circuit_to_dot(const Circuit& c, const std::vector<std::string>& var_names) {
  auto vname = [&](NodeId v) {
    if (v < static_cast<int>(var_names.size()) && !var_names[v].empty()) return var_names[v];
    return "X" + std::to_string(v);
  };
  std::ostringstream os;
  os << "digraph S {\n";
  std::vector<int> order = c.topo_order();
  std::sort(order.begin(), order.end());
  for (int ref : order) {
    const CircuitNode& n = c.node(ref);
    os << "  n" << ref;
    switch (n.kind) {
      case NodeKind::Sum:
        os << " [label=\"+\" shape=circle]";
        break;
      case NodeKind::Product:
        os << " [label=\"&times;\" shape=circle]";
        break;
      case NodeKind::Indicator:
        os << " [label=\"" << vname(n.var) << "=" << n.state << "\" shape=box]";
        break;
      case NodeKind::Param: {
        std::ostringstream v;
        v << n.value;
        os << " [label=\"" << v.str() << "\" shape=diamond]";
        break;
      }
      case NodeKind::Terminal: {
        os << " [label=\"" << vname(n.var) << ":";
        for (std::size_t i = 0; i < n.dist.size(); ++i) {
          std::ostringstream v;
          v << n.dist[i];
          os << (i ? "," : " ") << v.str();
        }
        os << "\" shape=box]";
        break;
      }
      case NodeKind::One:
        os << " [label=\"1\" shape=box]";
        break;
    }
    os << ";\n";
  }
  for (int ref : order) {
    const CircuitNode& n = c.node(ref);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      os << "  n" << ref << " -> n" << n.children[i];
      if (n.kind == NodeKind::Sum) {
        std::ostringstream v;
        v << n.weights[i];
        os << " [label=\"" << v.str() << "\"]";
      }
      os << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace spnbn

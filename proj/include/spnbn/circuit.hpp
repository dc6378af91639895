#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "spnbn/dag.hpp"

namespace spnbn {

enum class NodeKind { Sum, Product, Indicator, Param, Terminal, One };

enum class Stage { Ac, Spn };

struct CircuitNode {
  NodeKind kind = NodeKind::One;
  std::vector<int> children;    // Sum, Product
  std::vector<double> weights;  // Sum, parallel to children
  NodeId var = -1;              // Indicator, Terminal
  int state = -1;               // Indicator
  double value = 0.0;           // Param
  std::vector<double> dist;     // Terminal
};

// Rooted DAG of circuit nodes with integer refs and structural sharing.
// Indicator nodes are deduplicated per (variable, state).
class Circuit {
 public:
  int add_indicator(NodeId var, int state);
  int add_param(double value);
  int add_one();
  int add_terminal(NodeId var, std::vector<double> dist);
  int add_sum(std::vector<int> children, std::vector<double> weights);
  int add_unit_sum(std::vector<int> children);
  int add_product(std::vector<int> children);

  const CircuitNode& node(int ref) const;
  CircuitNode& mutable_node(int ref);
  int size() const { return static_cast<int>(nodes_.size()); }

  int root() const { return root_; }
  void set_root(int ref);

  Stage stage = Stage::Ac;
  // cardinality per variable id; index == NodeId
  std::vector<int> var_cards;
  // sum ref -> variable whose elimination created it (compiler bookkeeping)
  std::unordered_map<int, NodeId> provenance;

  // Nodes reachable from root, children before parents.
  std::vector<int> topo_order() const;
  std::vector<std::vector<int>> parent_lists() const;
  int reachable_count() const;

 private:
  void check_ref(int ref) const;
  std::vector<CircuitNode> nodes_;
  std::map<std::pair<NodeId, int>, int> indicator_index_;
  int root_ = -1;
  int one_ref_ = -1;
};

// Scope masks (bit v == variable v) for every node; computed from leaves up.
// Throws when a variable id is >= 64.
std::vector<std::uint64_t> scopes(const Circuit& c);
std::uint64_t scope_of(const Circuit& c, int ref);
std::vector<NodeId> scope_vars(std::uint64_t mask);

struct ValidityReport {
  bool complete = true;
  bool decomposable = true;
  std::vector<std::string> violations;
  bool ok() const { return complete && decomposable && violations.empty(); }
};

// Completeness/decomposability plus spn-stage hygiene (no Param nodes, sums
// normalized, One only allowed as a collapsed root).
ValidityReport check_valid(const Circuit& c);

// evidence[v] in [0, card) or -1 for unobserved; vector may be shorter than
// the variable table (missing entries count as unobserved).
double evaluate(const Circuit& c, const std::vector<int>& evidence);

// Canonical structural digest, invariant under child reordering; weights
// participate rounded to 12 decimals.
std::uint64_t fingerprint(const Circuit& c);

std::string circuit_to_dot(const Circuit& c, const std::vector<std::string>& var_names = {});

}  // namespace spnbn

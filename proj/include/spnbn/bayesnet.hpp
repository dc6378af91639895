#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spnbn/dag.hpp"
#include "spnbn/util.hpp"

namespace spnbn {

struct Variable {
  enum class Kind { Observable, Latent };
  std::string name;
  int cardinality = 2;
  Kind kind = Kind::Observable;
};

// Conditional probability table of one variable given its parents.  Rows are
// indexed by the parent assignment (parents in list order, first parent most
// significant); each row holds one probability per child state.
struct Cpt {
  NodeId child = -1;
  std::vector<NodeId> parents;
  std::vector<std::vector<double>> table;
};

struct BayesNet {
  std::vector<Variable> variables;
  Dag dag;
  std::vector<Cpt> cpts;  // cpts[v] belongs to variable v

  int size() const { return static_cast<int>(variables.size()); }
  int card(NodeId v) const { return variables[v].cardinality; }
  std::vector<int> cards() const;
  NodeId index_of(const std::string& name) const;  // -1 if absent

  // Throws Error on any structural defect: name clashes, CPT/dag parent
  // mismatch, unnormalized rows, wrong row counts.
  void validate(double tol = 1e-9) const;
};

// Explicit probability table over full assignments of `vars` (ascending ids).
struct JointTable {
  std::vector<NodeId> vars;
  AssignmentSpace space;  // cardinalities aligned with vars
  std::vector<double> p;

  double mass() const;
  // Marginal table over a subset of positions (indices into vars).
  std::vector<double> marginal(const std::vector<int>& positions) const;
};

inline constexpr std::size_t kDefaultJointCap = std::size_t{1} << 20;

JointTable joint_of_bn(const BayesNet& bn, std::size_t cap = kDefaultJointCap);

// P(x,y|z) == P(x|z) P(y|z) for every assignment whose conditioning
// probability exceeds tol.  Sets hold positions into j.vars.
bool is_independent(const JointTable& j, const std::vector<int>& x, const std::vector<int>& z,
                    const std::vector<int>& y, double tol = 1e-9);

// Every d-separation of dag holds in j.  dag nodes are positions into j.vars.
bool is_imap(const Dag& dag, const JointTable& j, double tol = 1e-9);

// dag is an I-map and deleting any single edge breaks I-mapness.
bool is_minimal_imap(const Dag& dag, const JointTable& j, double tol = 1e-9);

// All connected DAGs consistent with the ordering 0..n-1: every node i >= 1
// picks a nonempty parent subset of {0..i-1}.  Size is prod_{k=1}^{n-1}(2^k-1).
std::vector<Dag> enumerate_family(int n);

std::uint64_t family_size(int n);

// The index-th member of enumerate_family(n) without materializing the list.
Dag family_member(int n, std::uint64_t index);

// Deterministic strictly-positive CPTs for the given structure.
BayesNet random_cpts(const Dag& dag, const std::vector<int>& cards, std::uint64_t seed);

}  // namespace spnbn

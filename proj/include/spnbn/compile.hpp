#pragma once

#include <set>

#include "spnbn/bayesnet.hpp"
#include "spnbn/circuit.hpp"

namespace spnbn {

struct CompileStats {
  // Sums whose post-folding weights did not total 1 and had their mass pushed
  // into the parent edges.  Always 0 for reverse topological orders.
  int renormalized_sums = 0;
};

// Variable elimination over circuit-valued factors; the result is an AC whose
// sums carry unit weights and whose parameters sit in Param leaves.
Circuit compile_to_ac(const BayesNet& bn, const Ordering& sigma);

// Folds Param leaves into sum weights (flattening products first) and pushes
// any residual sum mass into the parent edges, yielding normalized sums.
// Evaluation is preserved exactly.
Circuit redistribute_parameters(const Circuit& ac, CompileStats* stats = nullptr);

// Replaces indicators of the given variables by the constant one and folds
// constants away.
Circuit marginalize(const Circuit& spn, const std::set<NodeId>& vars);

// Sums whose children are all indicators of one variable become Terminals.
Circuit add_terminal_nodes(const Circuit& spn, bool* changed = nullptr);

// Removes products of products and collapses single-child products.
Circuit flatten_products(const Circuit& spn, bool* changed = nullptr);

// Merges products over identical child multisets.
Circuit lump_products(const Circuit& spn, bool* changed = nullptr);

// Applies the three rewrites in order until none fires.
Circuit simplify_fixpoint(const Circuit& spn);

// compile_to_ac | redistribute_parameters | marginalize | simplify_fixpoint.
Circuit bn2spn(const BayesNet& bn, const Ordering& sigma, const std::set<NodeId>& marg,
               CompileStats* stats = nullptr);

}  // namespace spnbn

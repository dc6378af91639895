#pragma once

#include "spnbn/bayesnet.hpp"

namespace spnbn::testing {

// A -> B, binary, P(A=0)=0.3, P(B=0|A=0)=0.2, P(B=0|A=1)=0.6.
inline BayesNet bn_ab() {
  BayesNet bn;
  bn.variables = {{"A", 2, Variable::Kind::Observable}, {"B", 2, Variable::Kind::Observable}};
  bn.dag = Dag(2, {{0, 1}});
  bn.cpts = {
      {0, {}, {{0.3, 0.7}}},
      {1, {0}, {{0.2, 0.8}, {0.6, 0.4}}},
  };
  bn.validate();
  return bn;
}

// Chain X1 -> X2 -> X3 with seeded CPTs.
inline BayesNet bn_chain3(std::uint64_t seed = 11) {
  return random_cpts(Dag(3, {{0, 1}, {1, 2}}), {2, 2, 2}, seed);
}

// The five-variable worked example: edges {A->B, B->E, C->D, D->E}.
inline Dag dag_example4() { return Dag(5, {{0, 1}, {1, 4}, {2, 3}, {3, 4}}); }

inline BayesNet bn_example4(std::uint64_t seed = 23) {
  return random_cpts(dag_example4(), {2, 2, 2, 2, 2}, seed);
}

// Three-step binary HMM: H1->H2->H3 (ids 0,1,2), Hi->Oi (ids 3,4,5).
inline Dag dag_hmm3() { return Dag(6, {{0, 1}, {1, 2}, {0, 3}, {1, 4}, {2, 5}}); }

inline BayesNet bn_hmm3(std::uint64_t seed = 5) {
  BayesNet bn = random_cpts(dag_hmm3(), {2, 2, 2, 2, 2, 2}, seed);
  bn.variables[0].name = "H1";
  bn.variables[1].name = "H2";
  bn.variables[2].name = "H3";
  bn.variables[3].name = "O1";
  bn.variables[4].name = "O2";
  bn.variables[5].name = "O3";
  return bn;
}

}  // namespace spnbn::testing

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spnbn/compile.hpp"
#include "spnbn/error.hpp"

using namespace spnbn;
using namespace spnbn::testing;

namespace {

int count_kind(const Circuit& c, NodeKind kind) {
  int count = 0;
  for (int ref : c.topo_order())
    if (c.node(ref).kind == kind) ++count;
  return count;
}

}  // namespace

TEST_CASE("compile_to_ac evaluates to the joint on every assignment") {
  BayesNet bn = bn_ab();
  Circuit ac = compile_to_ac(bn, {1, 0});
  JointTable joint = joint_of_bn(bn);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(evaluate(ac, {a, b}) ==
            doctest::Approx(joint.p[joint.space.encode({a, b})]).epsilon(1e-12));
}

TEST_CASE("compile_to_ac on a single variable") {
  BayesNet bn = random_cpts(Dag(1, {}), {3}, 9);
  Circuit ac = compile_to_ac(bn, {0});
  CHECK(evaluate(ac, {-1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(count_kind(ac, NodeKind::Sum) == 1);
  CHECK(count_kind(ac, NodeKind::Param) == 3);
}

TEST_CASE("compiled HMM matches the joint on all 64 assignments") {
  BayesNet hmm = bn_hmm3();
  Circuit ac = compile_to_ac(hmm, first_reverse_topological(hmm.dag));
  JointTable joint = joint_of_bn(hmm);
  std::vector<int> assignment;
  for (std::size_t idx = 0; idx < joint.p.size(); ++idx) {
    joint.space.decode_into(idx, assignment);
    CHECK(evaluate(ac, assignment) == doctest::Approx(joint.p[idx]).epsilon(1e-12));
  }
}

TEST_CASE("compile_to_ac rejects bad orderings") {
  BayesNet bn = bn_ab();
  CHECK_THROWS_AS(compile_to_ac(bn, {0}), Error);
  CHECK_THROWS_AS(compile_to_ac(bn, {0, 0}), Error);
}

TEST_CASE("redistribute_parameters folds the prior into the root sum") {
  BayesNet bn = bn_ab();
  Circuit spn = redistribute_parameters(compile_to_ac(bn, {1, 0}));
  CHECK(spn.stage == Stage::Spn);
  CHECK(count_kind(spn, NodeKind::Param) == 0);
  const CircuitNode& root = spn.node(spn.root());
  REQUIRE(root.kind == NodeKind::Sum);
  CHECK(root.weights == std::vector<double>{0.3, 0.7});
}

TEST_CASE("redistribute_parameters preserves every full-evidence evaluation") {
  BayesNet bn = bn_example4();
  Circuit ac = compile_to_ac(bn, first_reverse_topological(bn.dag));
  Circuit spn = redistribute_parameters(ac);
  for (const auto& evidence : all_evidence(spn, {0, 1, 2, 3, 4}))
    CHECK(evaluate(spn, evidence) == doctest::Approx(evaluate(ac, evidence)).epsilon(1e-12));
}

TEST_CASE("redistribute_parameters is a no-op on a param-free circuit") {
  Circuit c;
  c.var_cards = {2};
  c.set_root(c.add_sum({c.add_indicator(0, 0), c.add_indicator(0, 1)}, {0.5, 0.5}));
  c.stage = Stage::Ac;
  Circuit out = redistribute_parameters(c);
  Circuit reference = c;
  reference.stage = Stage::Spn;
  CHECK(fingerprint(out) == fingerprint(reference));
}

TEST_CASE("non reverse-topological orders renormalize but preserve values") {
  BayesNet bn = bn_chain3(17);
  Ordering sigma = {1, 2, 0};  // eliminates the middle node first
  CHECK_FALSE(is_reverse_topological(bn.dag, sigma));
  CompileStats stats;
  Circuit ac = compile_to_ac(bn, sigma);
  Circuit spn = redistribute_parameters(ac, &stats);
  CHECK(stats.renormalized_sums > 0);
  for (const auto& evidence : all_evidence(spn, {0, 1, 2}))
    CHECK(evaluate(spn, evidence) == doctest::Approx(evaluate(ac, evidence)).epsilon(1e-12));
  ValidityReport report = check_valid(spn);
  CHECK(report.complete);
  CHECK(report.decomposable);
}

TEST_CASE("marginalize drops the hidden chain of the HMM") {
  BayesNet hmm = bn_hmm3();
  Circuit spn = redistribute_parameters(compile_to_ac(hmm, first_reverse_topological(hmm.dag)));
  Circuit marg = marginalize(spn, {0, 1, 2});
  CHECK(scope_vars(scope_of(marg, marg.root())) == std::vector<NodeId>{3, 4, 5});
  JointTable joint = joint_of_bn(hmm);
  for (const auto& evidence : all_evidence(marg, {3, 4, 5}))
    CHECK(evaluate(marg, evidence) ==
          doctest::Approx(submarginal(joint, evidence)).epsilon(1e-9));
}

TEST_CASE("marginalizing nothing is a fingerprint no-op") {
  BayesNet bn = bn_ab();
  Circuit spn = redistribute_parameters(compile_to_ac(bn, {1, 0}));
  CHECK(fingerprint(marginalize(spn, {})) == fingerprint(spn));
}

TEST_CASE("marginalizing everything collapses the root to one") {
  BayesNet bn = bn_ab();
  Circuit spn = redistribute_parameters(compile_to_ac(bn, {1, 0}));
  Circuit all = marginalize(spn, {0, 1});
  CHECK(all.node(all.root()).kind == NodeKind::One);
  CHECK(evaluate(all, {-1, -1}) == 1.0);
  CHECK_THROWS_AS(marginalize(all, {0}), Error);  // no longer in scope
}

TEST_CASE("add_terminal_nodes converts indicator sums") {
  Circuit c;
  c.var_cards = {2};
  c.set_root(c.add_sum({c.add_indicator(0, 0), c.add_indicator(0, 1)}, {0.2, 0.8}));
  c.stage = Stage::Spn;
  bool changed = false;
  Circuit t = add_terminal_nodes(c, &changed);
  CHECK(changed);
  REQUIRE(t.node(t.root()).kind == NodeKind::Terminal);
  CHECK(t.node(t.root()).dist == std::vector<double>{0.2, 0.8});

  bool changed_again = false;
  Circuit t2 = add_terminal_nodes(t, &changed_again);
  CHECK_FALSE(changed_again);
  CHECK(fingerprint(t2) == fingerprint(t));
}

TEST_CASE("add_terminal_nodes rejects mixed-variable indicator sums") {
  Circuit c;
  c.var_cards = {2, 2};
  c.set_root(c.add_sum({c.add_indicator(0, 0), c.add_indicator(1, 0)}, {0.5, 0.5}));
  c.stage = Stage::Spn;
  CHECK_THROWS_AS(add_terminal_nodes(c), Error);
}

TEST_CASE("flatten_products merges product chains") {
  Circuit c;
  c.var_cards = {2, 2, 2};
  int inner = c.add_product({c.add_indicator(0, 0), c.add_indicator(1, 0)});
  c.set_root(c.add_product({inner, c.add_indicator(2, 0)}));
  c.stage = Stage::Spn;
  bool changed = false;
  Circuit flat = flatten_products(c, &changed);
  CHECK(changed);
  CHECK(flat.node(flat.root()).children.size() == 3);
  bool changed_again = false;
  Circuit again = flatten_products(flat, &changed_again);
  CHECK_FALSE(changed_again);
  CHECK(fingerprint(again) == fingerprint(flat));
}

TEST_CASE("lump_products shares identical child multisets") {
  Circuit c;
  c.var_cards = {2, 2};
  int a = c.add_indicator(0, 0);
  int b = c.add_indicator(1, 0);
  int p1 = c.add_product({a, b});
  int p2 = c.add_product({b, a});  // same multiset, different order
  int a1 = c.add_indicator(0, 1);
  int b1 = c.add_indicator(1, 1);
  int q1 = c.add_product({a1, b1});
  c.set_root(c.add_sum({p1, p2, q1}, {0.25, 0.25, 0.5}));
  c.stage = Stage::Spn;
  bool changed = false;
  Circuit lumped = lump_products(c, &changed);
  CHECK(changed);
  const auto& kids = lumped.node(lumped.root()).children;
  CHECK(kids[0] == kids[1]);
  CHECK(kids[0] != kids[2]);
  CHECK(lumped.reachable_count() <= c.reachable_count());
}

TEST_CASE("the rewrites preserve evaluation on a compiled pipeline") {
  BayesNet bn = bn_example4();
  Circuit spn = marginalize(
      redistribute_parameters(compile_to_ac(bn, first_reverse_topological(bn.dag))),
      {0, 1, 2, 3});
  auto evidences = all_evidence(spn, {4});
  std::vector<double> before;
  for (const auto& e : evidences) before.push_back(evaluate(spn, e));

  Circuit t = add_terminal_nodes(spn);
  Circuit f = flatten_products(t);
  Circuit l = lump_products(f);
  CHECK(l.reachable_count() <= f.reachable_count());
  for (std::size_t i = 0; i < evidences.size(); ++i) {
    CHECK(evaluate(t, evidences[i]) == doctest::Approx(before[i]).epsilon(1e-12));
    CHECK(evaluate(f, evidences[i]) == doctest::Approx(before[i]).epsilon(1e-12));
    CHECK(evaluate(l, evidences[i]) == doctest::Approx(before[i]).epsilon(1e-12));
  }
}

TEST_CASE("simplify_fixpoint is idempotent") {
  BayesNet hmm = bn_hmm3();
  Circuit spn = marginalize(
      redistribute_parameters(compile_to_ac(hmm, first_reverse_topological(hmm.dag))),
      {0, 1, 2});
  Circuit once = simplify_fixpoint(spn);
  Circuit twice = simplify_fixpoint(once);
  CHECK(fingerprint(once) == fingerprint(twice));
}

TEST_CASE("the compiled-and-marginalized HMM has the worked-example shape") {
  BayesNet hmm = bn_hmm3();
  Circuit spn = bn2spn(hmm, first_reverse_topological(hmm.dag), {0, 1, 2});
  // five sums (S1..S5) and six observation terminals, two per observable
  CHECK(count_kind(spn, NodeKind::Sum) == 5);
  CHECK(count_kind(spn, NodeKind::Terminal) == 6);
  CHECK(count_kind(spn, NodeKind::Indicator) == 0);
  CHECK(count_kind(spn, NodeKind::One) == 0);
}

TEST_CASE("bn2spn of a single-variable network is a lone terminal") {
  BayesNet bn = random_cpts(Dag(1, {}), {2}, 4);
  Circuit spn = bn2spn(bn, {0}, {});
  CHECK(spn.node(spn.root()).kind == NodeKind::Terminal);
}

TEST_CASE("bn2spn output is valid and preserves all sub-marginals, n <= 3") {
  for (int n = 2; n <= 3; ++n) {
    std::uint64_t index = 0;
    for (const Dag& dag : enumerate_family(n)) {
      BayesNet bn = random_cpts(dag, std::vector<int>(n, 2), 100 + index++);
      JointTable joint = joint_of_bn(bn);
      for (const Ordering& sigma : reverse_topological_orderings(dag)) {
        Circuit spn = bn2spn(bn, sigma, {});
        CHECK(check_valid(spn).ok());
        CHECK(evaluate(spn, std::vector<int>(n, -1)) == doctest::Approx(1.0).epsilon(1e-9));
        std::vector<int> evidence(n, -1);
        for (int code = 0; code < std::pow(3, n); ++code) {
          int c = code;
          for (int v = 0; v < n; ++v) {
            evidence[v] = c % 3 - 1;
            c /= 3;
          }
          CHECK(evaluate(spn, evidence) ==
                doctest::Approx(submarginal(joint, evidence)).epsilon(1e-9));
        }
      }
    }
  }
}

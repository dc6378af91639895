#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spnbn/bayesnet.hpp"
#include "spnbn/error.hpp"
#include "spnbn/util.hpp"

using namespace spnbn;
using namespace spnbn::testing;

TEST_CASE("joint of A->B multiplies the matching CPT entries") {
  JointTable j = joint_of_bn(bn_ab());
  CHECK(j.p[j.space.encode({0, 0})] == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(j.p[j.space.encode({0, 1})] == doctest::Approx(0.24).epsilon(1e-12));
  CHECK(j.mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("deterministic CPTs concentrate all mass on one assignment") {
  BayesNet bn;
  bn.variables = {{"A", 2, {}}, {"B", 2, {}}};
  bn.dag = Dag(2, {{0, 1}});
  bn.cpts = {{0, {}, {{0.0, 1.0}}}, {1, {0}, {{1.0, 0.0}, {0.0, 1.0}}}};
  bn.validate();
  JointTable j = joint_of_bn(bn);
  int nonzero = 0;
  for (double p : j.p)
    if (p > 0) ++nonzero;
  CHECK(nonzero == 1);
  CHECK(j.p[j.space.encode({1, 1})] == 1.0);
}

TEST_CASE("uniform CPTs give the uniform joint") {
  BayesNet bn;
  bn.variables = {{"A", 2, {}}, {"B", 2, {}}, {"C", 2, {}}};
  bn.dag = Dag(3, {{0, 1}, {1, 2}});
  bn.cpts = {{0, {}, {{0.5, 0.5}}},
             {1, {0}, {{0.5, 0.5}, {0.5, 0.5}}},
             {2, {1}, {{0.5, 0.5}, {0.5, 0.5}}}};
  for (double p : joint_of_bn(bn).p) CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("joint cap is enforced") {
  BayesNet big = random_cpts(Dag(3), {2, 2, 2}, 1);
  CHECK_THROWS_AS(joint_of_bn(big, 4), Error);
}

TEST_CASE("independence oracle on canonical cases") {
  JointTable chain = joint_of_bn(bn_chain3());
  CHECK(is_independent(chain, {0}, {1}, {2}));
  CHECK_FALSE(is_independent(chain, {0}, {}, {2}, 1e-9));

  BayesNet coins = random_cpts(Dag(2), {2, 2}, 3);
  CHECK(is_independent(joint_of_bn(coins), {0}, {}, {1}));

  BayesNet copy;  // perfectly correlated pair
  copy.variables = {{"A", 2, {}}, {"B", 2, {}}};
  copy.dag = Dag(2, {{0, 1}});
  copy.cpts = {{0, {}, {{0.5, 0.5}}}, {1, {0}, {{1.0, 0.0}, {0.0, 1.0}}}};
  copy.validate();
  CHECK_FALSE(is_independent(joint_of_bn(copy), {0}, {}, {1}));
  CHECK_THROWS_AS(is_independent(joint_of_bn(copy), {0}, {0}, {1}), Error);
}

TEST_CASE("is_imap on degenerate structures") {
  BayesNet copy;
  copy.variables = {{"A", 2, {}}, {"B", 2, {}}};
  copy.dag = Dag(2, {{0, 1}});
  copy.cpts = {{0, {}, {{0.5, 0.5}}}, {1, {0}, {{0.9, 0.1}, {0.1, 0.9}}}};
  copy.validate();
  JointTable correlated = joint_of_bn(copy);
  CHECK(is_imap(copy.dag, correlated));        // complete DAG claims nothing
  CHECK_FALSE(is_imap(Dag(2), correlated));    // empty DAG claims A || B

  BayesNet coins = random_cpts(Dag(2), {2, 2}, 3);
  JointTable indep = joint_of_bn(coins);
  CHECK(is_imap(Dag(2, {{0, 1}}), indep));
  CHECK_FALSE(is_minimal_imap(Dag(2, {{0, 1}}), indep));  // the edge is superfluous
}

TEST_CASE("a chain is a minimal I-map of its own random joint") {
  BayesNet bn = bn_chain3();
  JointTable j = joint_of_bn(bn);
  CHECK(is_imap(bn.dag, j));
  CHECK(is_minimal_imap(bn.dag, j));
}

TEST_CASE("is_minimal_imap requires an I-map") {
  BayesNet copy;
  copy.variables = {{"A", 2, {}}, {"B", 2, {}}};
  copy.dag = Dag(2, {{0, 1}});
  copy.cpts = {{0, {}, {{0.5, 0.5}}}, {1, {0}, {{0.9, 0.1}, {0.1, 0.9}}}};
  copy.validate();
  CHECK_THROWS_AS(is_minimal_imap(Dag(2), joint_of_bn(copy)), Error);
}

TEST_CASE("d-separation in any family dag is sound for its random joints") {
  for (int n = 2; n <= 4; ++n)
    for (const Dag& dag : enumerate_family(n)) {
      JointTable j = joint_of_bn(random_cpts(dag, std::vector<int>(n, 2), hash_combine(99, n)));
      CHECK(is_imap(dag, j));
    }
}

TEST_CASE("family counts match the closed form") {
  CHECK(enumerate_family(2).size() == 1);
  CHECK(enumerate_family(3).size() == 3);
  CHECK(enumerate_family(4).size() == 21);
  CHECK(enumerate_family(5).size() == 315);
  CHECK(enumerate_family(6).size() == 9765);
  CHECK(family_size(7) == 615195);
  for (int n = 2; n <= 7; ++n) {
    std::uint64_t expected = 1;
    for (int k = 1; k < n; ++k) expected *= (std::uint64_t{1} << k) - 1;
    CHECK(family_size(n) == expected);
  }
  CHECK_THROWS_AS(enumerate_family(1), Error);
  CHECK_THROWS_AS(enumerate_family(8), Error);
}

TEST_CASE("family members are connected and rooted at node 0") {
  for (int n = 2; n <= 5; ++n)
    for (const Dag& dag : enumerate_family(n)) {
      for (NodeId v = 1; v < n; ++v) CHECK_FALSE(dag.parents(v).empty());
      CHECK(dag.parents(0).empty());
      // nonempty parent sets make the underlying graph connected to node 0
      std::vector<bool> reached(n, false);
      reached[0] = true;
      for (NodeId v = 1; v < n; ++v) {
        bool linked = false;
        for (NodeId p : dag.parents(v))
          if (reached[p]) linked = true;
        reached[v] = linked;
        CHECK(linked);
      }
    }
}

TEST_CASE("family_member agrees with enumerate_family") {
  auto family = enumerate_family(4);
  for (std::size_t i = 0; i < family.size(); ++i) CHECK(family_member(4, i) == family[i]);
  CHECK_THROWS_AS(family_member(4, family_size(4)), Error);
}

TEST_CASE("random CPTs are deterministic, normalized and seed-sensitive") {
  Dag dag = dag_example4();
  BayesNet a = random_cpts(dag, {2, 2, 2, 2, 2}, 42);
  BayesNet b = random_cpts(dag, {2, 2, 2, 2, 2}, 42);
  BayesNet c = random_cpts(dag, {2, 2, 2, 2, 2}, 43);
  bool identical = true, different = false;
  for (NodeId v = 0; v < 5; ++v)
    for (std::size_t r = 0; r < a.cpts[v].table.size(); ++r)
      for (int s = 0; s < 2; ++s) {
        identical &= a.cpts[v].table[r][s] == b.cpts[v].table[r][s];
        different |= a.cpts[v].table[r][s] != c.cpts[v].table[r][s];
        CHECK(a.cpts[v].table[r][s] > 0.0);
      }
  CHECK(identical);
  CHECK(different);
  for (NodeId v = 0; v < 5; ++v)
    for (const auto& row : a.cpts[v].table) {
      double sum = 0.0;
      for (double x : row) sum += x;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

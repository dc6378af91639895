#include "spnbn/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "spnbn/error.hpp"

namespace spnbn {

std::vector<int> BayesNet::cards() const {
  std::vector<int> out(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) out[i] = variables[i].cardinality;
  return out;
}

NodeId BayesNet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return static_cast<NodeId>(i);
  return -1;
}

void BayesNet::validate(double tol) const {
  const int n = size();
  if (dag.node_count() != n) throw Error("bayesnet: dag size does not match variable count");
  if (static_cast<int>(cpts.size()) != n) throw Error("bayesnet: one CPT per variable required");
  std::set<std::string> names;
  for (const Variable& v : variables) {
    if (v.cardinality < 2) throw Error("bayesnet: variable '" + v.name + "' needs cardinality >= 2");
    if (!names.insert(v.name).second) throw Error("bayesnet: duplicate variable name '" + v.name + "'");
  }
  for (NodeId v = 0; v < n; ++v) {
    const Cpt& cpt = cpts[v];
    if (cpt.child != v) throw Error("bayesnet: CPT for variable " + std::to_string(v) + " misfiled");
    if (cpt.parents != dag.parents(v))
      throw Error("bayesnet: CPT parents of '" + variables[v].name + "' do not match the dag");
    std::size_t rows = 1;
    for (NodeId p : cpt.parents) rows *= static_cast<std::size_t>(variables[p].cardinality);
    if (cpt.table.size() != rows)
      throw Error("bayesnet: CPT of '" + variables[v].name + "' has wrong row count");
    for (const auto& row : cpt.table) {
      if (static_cast<int>(row.size()) != variables[v].cardinality)
        throw Error("bayesnet: CPT row length mismatch for '" + variables[v].name + "'");
      double sum = 0.0;
      for (double x : row) {
        if (x < 0.0) throw Error("bayesnet: negative probability in CPT of '" + variables[v].name + "'");
        sum += x;
      }
      if (std::abs(sum - 1.0) > tol)
        throw Error("bayesnet: CPT row of '" + variables[v].name + "' sums to " + std::to_string(sum));
    }
  }
}

double JointTable::mass() const {
  double sum = 0.0;
  for (double x : p) sum += x;
  return sum;
}

std::vector<double> JointTable::marginal(const std::vector<int>& positions) const {
  std::vector<int> sub_cards;
  sub_cards.reserve(positions.size());
  for (int pos : positions) sub_cards.push_back(space.cards()[pos]);
  AssignmentSpace sub(sub_cards);
  std::vector<double> out(sub.size(), 0.0);
  std::vector<int> full;
  std::vector<int> partial(positions.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    space.decode_into(i, full);
    for (std::size_t k = 0; k < positions.size(); ++k) partial[k] = full[positions[k]];
    out[sub.encode(partial)] += p[i];
  }
  return out;
}

JointTable joint_of_bn(const BayesNet& bn, std::size_t cap) {
  bn.validate();
  JointTable j;
  const int n = bn.size();
  j.vars.resize(n);
  for (int i = 0; i < n; ++i) j.vars[i] = i;
  j.space = AssignmentSpace(bn.cards());
  if (j.space.size() > cap)
    throw Error("joint_of_bn: assignment space " + std::to_string(j.space.size()) +
                " exceeds cap " + std::to_string(cap));
  j.p.resize(j.space.size());
  std::vector<int> assignment;
  for (std::size_t idx = 0; idx < j.p.size(); ++idx) {
    j.space.decode_into(idx, assignment);
    double prob = 1.0;
    for (NodeId v = 0; v < n; ++v) {
      const Cpt& cpt = bn.cpts[v];
      std::size_t row = 0;
      for (NodeId parent : cpt.parents)
        row = row * bn.card(parent) + static_cast<std::size_t>(assignment[parent]);
      prob *= cpt.table[row][assignment[v]];
    }
    j.p[idx] = prob;
  }
  return j;
}

bool is_independent(const JointTable& j, const std::vector<int>& x, const std::vector<int>& z,
                    const std::vector<int>& y, double tol) {
  std::vector<int> all;
  all.insert(all.end(), x.begin(), x.end());
  all.insert(all.end(), z.begin(), z.end());
  all.insert(all.end(), y.begin(), y.end());
  {
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error("is_independent: sets must be disjoint");
  }
  // marginal over x z y, laid out as [x | z | y]
  std::vector<double> m = j.marginal(all);
  std::vector<int> cards;
  for (int pos : all) cards.push_back(j.space.cards()[pos]);
  AssignmentSpace space(cards);

  const int nx = static_cast<int>(x.size()), nz = static_cast<int>(z.size()),
            ny = static_cast<int>(y.size());
  std::size_t size_x = 1, size_z = 1, size_y = 1;
  for (int i = 0; i < nx; ++i) size_x *= cards[i];
  for (int i = 0; i < nz; ++i) size_z *= cards[nx + i];
  for (int i = 0; i < ny; ++i) size_y *= cards[nx + nz + i];

  for (std::size_t az = 0; az < size_z; ++az) {
    double pz = 0.0;
    for (std::size_t ax = 0; ax < size_x; ++ax)
      for (std::size_t ay = 0; ay < size_y; ++ay)
        pz += m[(ax * size_z + az) * size_y + ay];
    if (pz <= tol) continue;
    for (std::size_t ax = 0; ax < size_x; ++ax) {
      double pxz = 0.0;
      for (std::size_t ay = 0; ay < size_y; ++ay) pxz += m[(ax * size_z + az) * size_y + ay];
      for (std::size_t ay = 0; ay < size_y; ++ay) {
        double pyz = 0.0;
        for (std::size_t bx = 0; bx < size_x; ++bx) pyz += m[(bx * size_z + az) * size_y + ay];
        double pxyz = m[(ax * size_z + az) * size_y + ay];
        if (std::abs(pxyz / pz - (pxz / pz) * (pyz / pz)) > tol) return false;
      }
    }
  }
  return true;
}

namespace {

// Iterate every disjoint labeling of nodes into (none, x, z, y) with x and y
// nonempty; call fn(x, z, y); stop early when fn returns false.
template <typename Fn>
bool for_each_triple(int n, Fn&& fn) {
  std::vector<int> label(n, 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (int i = 0; i < n; ++i) t *= 4;
    return t;
  }();
  std::vector<int> x, z, y;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int i = 0; i < n; ++i) {
      label[i] = static_cast<int>(c % 4);
      c /= 4;
    }
    x.clear();
    z.clear();
    y.clear();
    for (int i = 0; i < n; ++i) {
      if (label[i] == 1) x.push_back(i);
      if (label[i] == 2) z.push_back(i);
      if (label[i] == 3) y.push_back(i);
    }
    if (x.empty() || y.empty()) continue;
    if (x[0] > y[0]) continue;  // (x,z,y) and (y,z,x) are the same statement
    if (!fn(x, z, y)) return false;
  }
  return true;
}

}  // namespace

bool is_imap(const Dag& dag, const JointTable& j, double tol) {
  if (dag.node_count() != static_cast<int>(j.vars.size()))
    throw Error("is_imap: dag and joint dimensions differ");
  return for_each_triple(dag.node_count(), [&](const std::vector<int>& x, const std::vector<int>& z,
                                               const std::vector<int>& y) {
    if (!d_separated(dag, x, z, y)) return true;
    return is_independent(j, x, z, y, tol);
  });
}

bool is_minimal_imap(const Dag& dag, const JointTable& j, double tol) {
  if (!is_imap(dag, j, tol)) throw Error("is_minimal_imap: dag is not an I-map to begin with");
  for (const Edge& e : dag.edges()) {
    if (is_imap(dag.without_edge(e.first, e.second), j, tol)) return false;
  }
  return true;
}

std::uint64_t family_size(int n) {
  std::uint64_t total = 1;
  for (int k = 1; k < n; ++k) total *= (std::uint64_t{1} << k) - 1;
  return total;
}

Dag family_member(int n, std::uint64_t index) {
  if (n < 2 || n > 7) throw Error("family_member: n must be in [2, 7]");
  if (index >= family_size(n)) throw Error("family_member: index out of range");
  // mixed radix over nonempty parent masks; node n-1 is the fastest digit
  std::vector<std::uint64_t> mask(n, 1);
  for (NodeId i = n - 1; i >= 1; --i) {
    std::uint64_t radix = (std::uint64_t{1} << i) - 1;
    mask[i] = 1 + index % radix;
    index /= radix;
  }
  std::vector<Edge> edges;
  for (NodeId i = 1; i < n; ++i)
    for (NodeId p = 0; p < i; ++p)
      if (mask[i] >> p & 1) edges.push_back({p, i});
  return Dag(n, edges);
}

std::vector<Dag> enumerate_family(int n) {
  if (n < 2 || n > 7) throw Error("enumerate_family: n must be in [2, 7]");
  const std::uint64_t total = family_size(n);
  std::vector<Dag> out;
  out.reserve(total);
  for (std::uint64_t index = 0; index < total; ++index) out.push_back(family_member(n, index));
  return out;
}

BayesNet random_cpts(const Dag& dag, const std::vector<int>& cards, std::uint64_t seed) {
  const int n = dag.node_count();
  if (static_cast<int>(cards.size()) != n) throw Error("random_cpts: cards size mismatch");
  for (int c : cards)
    if (c < 2) throw Error("random_cpts: cardinalities must be >= 2");
  BayesNet bn;
  bn.dag = dag;
  bn.variables.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    bn.variables[v].name = "X" + std::to_string(v + 1);
    bn.variables[v].cardinality = cards[v];
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  bn.cpts.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    Cpt& cpt = bn.cpts[v];
    cpt.child = v;
    cpt.parents = dag.parents(v);
    std::size_t rows = 1;
    for (NodeId p : cpt.parents) rows *= static_cast<std::size_t>(cards[p]);
    cpt.table.assign(rows, std::vector<double>(cards[v]));
    for (auto& row : cpt.table) {
      double sum = 0.0;
      for (double& x : row) {
        x = uniform(rng) + 1e-3;  // keep every entry strictly positive
        sum += x;
      }
      for (double& x : row) x /= sum;
    }
  }
  bn.validate(1e-12);
  return bn;
}

}  // namespace spnbn

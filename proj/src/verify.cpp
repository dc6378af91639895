#include "spnbn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "spnbn/error.hpp"
#include "spnbn/util.hpp"

namespace spnbn {

std::string MargPolicy::label() const {
  switch (kind) {
    case Kind::InternalOnly:
      return "internal";
    case Kind::None:
      return "none";
    case Kind::Explicit: {
      std::string out = "explicit:";
      bool first = true;
      for (NodeId v : explicit_vars) {
        if (!first) out += "+";
        out += std::to_string(v);
        first = false;
      }
      return out;
    }
  }
  return "?";
}

std::set<NodeId> marginalization_set(const BayesNet& bn, const MargPolicy& policy) {
  switch (policy.kind) {
    case MargPolicy::Kind::InternalOnly: {
      std::set<NodeId> out;
      for (NodeId v = 0; v < bn.size(); ++v)
        if (!bn.dag.children(v).empty()) out.insert(v);
      return out;
    }
    case MargPolicy::Kind::None:
      return {};
    case MargPolicy::Kind::Explicit:
      for (NodeId v : policy.explicit_vars)
        if (v < 0 || v >= bn.size()) throw Error("marginalization_set: variable out of range");
      return policy.explicit_vars;
  }
  return {};
}

namespace {

Correspondence build_correspondence(const BayesNet& original, const Decompilation& d,
                                    const std::set<NodeId>& marginalized) {
  const DecompiledBn& out = d.result;
  const Circuit& c = d.aug.circuit;
  Correspondence corr;
  corr.original_of_bnnode.assign(out.bn.size(), -1);

  for (int node = 0; node < out.bn.size(); ++node) {
    int latent = out.latent_of_bnnode[node];
    if (latent < 0) {
      corr.original_of_bnnode[node] = out.var_of_bnnode[node];
      continue;
    }
    NodeId var = -1;
    for (const SumRegion& r : d.aug.regions) {
      if (r.latent != latent) continue;
      for (int m : r.members) {
        auto it = c.provenance.find(m);
        if (it == c.provenance.end())
          throw Error("correspondence: sum node " + std::to_string(m) +
                      " carries no provenance");
        if (var < 0)
          var = it->second;
        else if (var != it->second)
          throw Error("correspondence: region members disagree on provenance (" +
                      std::to_string(var) + " vs " + std::to_string(it->second) + ")");
      }
    }
    corr.original_of_bnnode[node] = var;
  }

  std::vector<bool> hit(original.size(), false);
  for (int node = 0; node < out.bn.size(); ++node) {
    NodeId var = corr.original_of_bnnode[node];
    if (var < 0 || var >= original.size())
      throw Error("correspondence: node maps outside the original variables");
    if (hit[var])
      throw Error("correspondence: two decompiled nodes map to original variable " +
                  std::to_string(var) + " (not bijective)");
    hit[var] = true;
    int latent = out.latent_of_bnnode[node];
    if (latent >= 0 && !marginalized.count(var))
      throw Error("correspondence: latent recovered for non-marginalized variable " +
                  std::to_string(var));
  }
  if (out.bn.size() != original.size())
    throw Error("correspondence: decompiled network has " + std::to_string(out.bn.size()) +
                " nodes for " + std::to_string(original.size()) + " original variables");
  return corr;
}

}  // namespace

RoundtripResult roundtrip(const BayesNet& bn, const Ordering& sigma, const MargPolicy& policy,
                          RegionPolicy regions) {
  RoundtripResult rt;
  rt.marginalized = marginalization_set(bn, policy);
  Circuit spn = bn2spn(bn, sigma, rt.marginalized, &rt.stats);
  rt.decompilation = decompile(spn, regions);
  rt.corr = build_correspondence(bn, rt.decompilation, rt.marginalized);
  return rt;
}

std::set<Edge> mapped_edges(const DecompiledBn& decompiled, const Correspondence& corr) {
  std::set<Edge> out;
  for (const Edge& e : decompiled.bn.dag.edges())
    out.insert({corr.original_of_bnnode[e.first], corr.original_of_bnnode[e.second]});
  return out;
}

TrialRecord verify_moral_closure(const BayesNet& bn, const Ordering& sigma,
                                 const MargPolicy& policy) {
  TrialRecord record;
  record.n = bn.size();
  record.sigma = sigma;
  record.sigma_is_reverse_topological = is_reverse_topological(bn.dag, sigma);
  record.policy = policy.label();
  Dag closure = moral_closure(bn.dag, identity_ordering(bn.size()));
  try {
    RoundtripResult rt = roundtrip(bn, sigma, policy);
    record.closure_match = mapped_edges(rt.decompilation.result, rt.corr) == closure.edges();
    if (!record.closure_match) record.notes = "edge set differs from moral closure";
    if (rt.stats.renormalized_sums > 0) {
      if (!record.notes.empty()) record.notes += "; ";
      record.notes += "renormalized " + std::to_string(rt.stats.renormalized_sums) + " sums";
    }
    if (rt.decompilation.assignment.scope_shared_across_layers) {
      if (!record.notes.empty()) record.notes += "; ";
      record.notes += "scope shared across layers";
    }
  } catch (const std::exception& e) {
    record.closure_match = false;
    record.notes = e.what();
  }
  return record;
}

bool verify_idempotence(const BayesNet& bn, const Ordering& sigma, const MargPolicy& policy,
                        std::uint64_t seed) {
  Dag closure = moral_closure(bn.dag, identity_ordering(bn.size()));
  BayesNet closed = random_cpts(closure, bn.cards(), seed);
  Ordering order = is_reverse_topological(closure, sigma) ? sigma
                                                          : first_reverse_topological(closure);
  RoundtripResult rt = roundtrip(closed, order, policy);
  return mapped_edges(rt.decompilation.result, rt.corr) == closure.edges();
}

namespace {

std::vector<Ordering> node1_last_orderings(int n) {
  std::vector<NodeId> tail;
  for (NodeId v = 1; v < n; ++v) tail.push_back(v);
  std::vector<Ordering> out;
  do {
    Ordering sigma = tail;
    sigma.push_back(0);
    out.push_back(std::move(sigma));
  } while (std::next_permutation(tail.begin(), tail.end()));
  return out;
}

}  // namespace

TableSummary run_table_experiment(int n, const TableOptions& options) {
  if (n < 2 || n > 7) throw Error("run_table_experiment: n must be in [2, 7]");
  TableSummary summary;
  summary.n = n;
  summary.bn_count = family_size(n);

  struct Trial {
    std::uint64_t bn_index;
    Ordering sigma;
  };
  std::vector<Trial> trials;

  if (options.sample > 0) {
    std::mt19937_64 rng(options.seed);
    for (std::uint64_t i = 0; i < options.sample; ++i) {
      Trial t;
      t.bn_index = rng() % summary.bn_count;
      if (options.orderings == OrderingMode::ReverseTopologicalOnly) {
        auto orders = reverse_topological_orderings(family_member(n, t.bn_index));
        t.sigma = orders[rng() % orders.size()];
      } else {
        std::vector<NodeId> tail;
        for (NodeId v = 1; v < n; ++v) tail.push_back(v);
        std::shuffle(tail.begin(), tail.end(), rng);
        t.sigma = tail;
        t.sigma.push_back(0);
      }
      trials.push_back(std::move(t));
    }
  } else if (options.orderings == OrderingMode::Node1LastPermutations) {
    std::vector<Ordering> orderings = node1_last_orderings(n);
    summary.ordering_count = orderings.size();
    for (std::uint64_t b = 0; b < summary.bn_count; ++b)
      for (const Ordering& sigma : orderings) trials.push_back({b, sigma});
  } else {
    for (std::uint64_t b = 0; b < summary.bn_count; ++b)
      for (Ordering& sigma : reverse_topological_orderings(family_member(n, b)))
        trials.push_back({b, std::move(sigma)});
  }

  summary.trial_count = trials.size();
  summary.records.resize(trials.size());

  unsigned jobs = options.jobs > 0 ? static_cast<unsigned>(options.jobs)
                                   : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, std::max<std::size_t>(trials.size(), 1));

  auto worker = [&](unsigned worker_index) {
    for (std::size_t i = worker_index; i < trials.size(); i += jobs) {
      const Trial& t = trials[i];
      BayesNet bn = random_cpts(family_member(n, t.bn_index), std::vector<int>(n, 2),
                                hash_combine(options.seed, t.bn_index));
      TrialRecord record = verify_moral_closure(bn, t.sigma, options.policy);
      record.bn_index = t.bn_index;
      summary.records[i] = std::move(record);
    }
  };
  if (jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  for (const TrialRecord& r : summary.records) {
    if (r.closure_match) ++summary.match_count;
    if (r.sigma_is_reverse_topological) {
      ++summary.revtopo_trial_count;
      if (r.closure_match) ++summary.revtopo_match_count;
    }
  }
  return summary;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "n,bn_index,sigma,sigma_is_reverse_topological,marginalization_policy,closure_match,notes\n";
  for (const TrialRecord& r : records) {
    os << r.n << ',' << r.bn_index << ',';
    for (std::size_t i = 0; i < r.sigma.size(); ++i) os << (i ? "-" : "") << r.sigma[i] + 1;
    os << ',' << (r.sigma_is_reverse_topological ? "true" : "false") << ',' << r.policy << ','
       << (r.closure_match ? "true" : "false") << ',';
    std::string notes = r.notes;
    for (char& ch : notes)
      if (ch == ',' || ch == '\n') ch = ';';
    os << notes << '\n';
  }
  return os.str();
}

LemmaReport verify_lemma(const Circuit& spn, RegionPolicy regions, std::size_t cap) {
  Decompilation d = decompile(spn, regions);
  JointTable joint = augmented_joint(d.aug, cap);
  LemmaReport report;

  std::vector<int> position(d.aug.circuit.var_cards.size(), -1);
  for (std::size_t k = 0; k < joint.vars.size(); ++k) position[joint.vars[k]] = k;

  const Circuit& c = d.aug.circuit;
  for (const SumRegion& r : d.aug.regions) {
    for (int member : r.members) {
      ++report.members_checked;
      // latents of all sum ancestors vs latents of conditioning ancestors
      std::vector<char> reach_m(c.size(), 0);
      reach_m[member] = 1;
      for (int ref : c.topo_order()) {
        if (reach_m[ref]) continue;
        for (int child : c.node(ref).children)
          if (reach_m[child]) {
            reach_m[ref] = 1;
            break;
          }
      }
      std::set<int> ancestor_latents;
      for (int a : c.topo_order())
        if (a != member && c.node(a).kind == NodeKind::Sum && a < d.aug.original_size &&
            reach_m[a] && d.aug.node_latent[a] != r.latent)
          ancestor_latents.insert(d.aug.node_latent[a]);
      std::set<int> conditioning_latents;
      for (int a : conditioning_ancestors(d.aug, member))
        conditioning_latents.insert(d.aug.node_latent[a]);

      std::vector<int> a_pos, c_pos;  // positions in the joint, aligned
      std::vector<int> c_index;       // index of each conditioning latent within A
      std::vector<int> a_list(ancestor_latents.begin(), ancestor_latents.end());
      for (std::size_t i = 0; i < a_list.size(); ++i) {
        a_pos.push_back(position[d.aug.latents[a_list[i]].id]);
        if (conditioning_latents.count(a_list[i])) c_index.push_back(i);
      }
      for (int idx : c_index) c_pos.push_back(a_pos[idx]);
      int target_pos = position[d.aug.latents[r.latent].id];

      std::vector<int> m_full_pos = {target_pos};
      m_full_pos.insert(m_full_pos.end(), a_pos.begin(), a_pos.end());
      std::vector<double> m_full = joint.marginal(m_full_pos);
      std::vector<int> m_cond_pos = {target_pos};
      m_cond_pos.insert(m_cond_pos.end(), c_pos.begin(), c_pos.end());
      std::vector<double> m_cond = joint.marginal(m_cond_pos);

      const int card = d.aug.latents[r.latent].cardinality;
      std::vector<int> a_cards;
      for (int pos : a_pos) a_cards.push_back(joint.space.cards()[pos]);
      AssignmentSpace a_space(a_cards);
      std::vector<int> c_cards;
      for (int pos : c_pos) c_cards.push_back(joint.space.cards()[pos]);
      AssignmentSpace c_space(c_cards);

      std::vector<int> a_assign, c_assign(c_index.size());
      for (std::size_t ai = 0; ai < a_space.size(); ++ai) {
        a_space.decode_into(ai, a_assign);
        double pa = 0.0;
        for (int k = 0; k < card; ++k) pa += m_full[k * a_space.size() + ai];
        if (pa <= 0.0) continue;
        for (std::size_t j = 0; j < c_index.size(); ++j) c_assign[j] = a_assign[c_index[j]];
        std::size_t ci = c_space.encode(c_assign);
        double pc = 0.0;
        for (int k = 0; k < card; ++k) pc += m_cond[k * c_space.size() + ci];
        for (int k = 0; k < card; ++k) {
          double lhs = m_full[k * a_space.size() + ai] / pa;
          double rhs = m_cond[k * c_space.size() + ci] / pc;
          report.max_deviation = std::max(report.max_deviation, std::abs(lhs - rhs));
        }
      }
    }
  }
  report.pass = report.max_deviation <= 1e-9;
  return report;
}

}  // namespace spnbn

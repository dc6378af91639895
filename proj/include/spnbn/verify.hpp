#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spnbn/bayesnet.hpp"
#include "spnbn/compile.hpp"
#include "spnbn/decompile.hpp"

namespace spnbn {

struct MargPolicy {
  enum class Kind { InternalOnly, None, Explicit };
  Kind kind = Kind::InternalOnly;
  std::set<NodeId> explicit_vars;

  static MargPolicy internal_only() { return {Kind::InternalOnly, {}}; }
  static MargPolicy none() { return {Kind::None, {}}; }
  static MargPolicy explicit_set(std::set<NodeId> vars) {
    return {Kind::Explicit, std::move(vars)};
  }
  std::string label() const;
};

// The concrete set a policy marginalizes for a given network; internal-only
// picks every variable that has children.
std::set<NodeId> marginalization_set(const BayesNet& bn, const MargPolicy& policy);

// decompiled BN node -> original variable, from compiler provenance.
struct Correspondence {
  std::vector<NodeId> original_of_bnnode;
};

struct RoundtripResult {
  Decompilation decompilation;
  Correspondence corr;
  CompileStats stats;
  std::set<NodeId> marginalized;
};

RoundtripResult roundtrip(const BayesNet& bn, const Ordering& sigma, const MargPolicy& policy,
                          RegionPolicy regions = RegionPolicy::LayerLocal);

// Decompiled edges relabeled into original variable ids.
std::set<Edge> mapped_edges(const DecompiledBn& decompiled, const Correspondence& corr);

struct TrialRecord {
  int n = 0;
  std::uint64_t bn_index = 0;
  Ordering sigma;
  bool sigma_is_reverse_topological = false;
  std::string policy;
  bool closure_match = false;
  std::string notes;
};

TrialRecord verify_moral_closure(const BayesNet& bn, const Ordering& sigma,
                                 const MargPolicy& policy);

// Feeds the moral closure of bn (with fresh random CPTs) through the pipeline
// and checks the edge set comes back unchanged.
bool verify_idempotence(const BayesNet& bn, const Ordering& sigma, const MargPolicy& policy,
                        std::uint64_t seed = 7);

enum class OrderingMode { Node1LastPermutations, ReverseTopologicalOnly };

struct TableSummary {
  int n = 0;
  std::uint64_t bn_count = 0;
  std::uint64_t ordering_count = 0;  // per-BN; 0 when it varies (rev-topo mode)
  std::uint64_t trial_count = 0;
  std::uint64_t match_count = 0;
  std::uint64_t revtopo_trial_count = 0;
  std::uint64_t revtopo_match_count = 0;
  std::vector<TrialRecord> records;
};

struct TableOptions {
  OrderingMode orderings = OrderingMode::Node1LastPermutations;
  MargPolicy policy = MargPolicy::internal_only();
  int jobs = 0;                // 0 = hardware concurrency
  std::uint64_t sample = 0;    // 0 = exhaustive; else number of sampled trials
  std::uint64_t seed = 1;      // CPT seeds and sampling
};

TableSummary run_table_experiment(int n, const TableOptions& options = {});

std::string records_to_csv(const std::vector<TrialRecord>& records);

struct LemmaReport {
  double max_deviation = 0.0;
  int members_checked = 0;
  bool pass = true;
};

// P(Z_S | Z_ancestors) == P(Z_S | Z_conditioning) against the brute-force
// augmented joint, for every member sum.
LemmaReport verify_lemma(const Circuit& spn, RegionPolicy regions = RegionPolicy::LayerLocal,
                         std::size_t cap = kDefaultJointCap);

}  // namespace spnbn

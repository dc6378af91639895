#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "spnbn/bayesnet.hpp"
#include "spnbn/circuit.hpp"

namespace spnbn {

struct LatentVar {
  NodeId id = -1;       // fresh variable id, beyond the observable ids
  int cardinality = 0;  // child count shared by the region members
};

struct SumRegion {
  int depth = 0;
  std::uint64_t scope = 0;
  std::vector<int> members;  // sum refs, ascending
  int latent = -1;           // index into LatentAssignment::latents
};

// How sum nodes are grouped into regions.  LayerLocal follows the prose
// definition (same sum-layer and same scope); Global reuses a latent whenever
// a scope reappears in a deeper layer.
enum class RegionPolicy { LayerLocal, Global };

struct LatentAssignment {
  std::vector<LatentVar> latents;
  std::vector<SumRegion> regions;
  std::vector<int> node_latent;  // per circuit ref; -1 for non-sums
  // set when some scope occurs in more than one layer (observable difference
  // between the two policies)
  bool scope_shared_across_layers = false;
};

// Sum nodes strictly above `ref` on the longest root path.
int sum_depth(const Circuit& spn, int ref);

// Sums grouped by sum-depth, ascending; a partition of all reachable sums.
std::vector<std::vector<int>> sum_layers(const Circuit& spn);

LatentAssignment assign_latents(const Circuit& spn, RegionPolicy policy = RegionPolicy::LayerLocal);

struct AugmentedCircuit {
  Circuit circuit;  // original refs stay valid; augmentation only appends/rewires
  std::vector<LatentVar> latents;
  std::vector<SumRegion> regions;
  std::vector<int> node_latent;     // per original ref
  std::vector<int> twin_of_latent;  // twin sum ref per latent, -1 when absent
  int original_size = 0;            // node count before augmentation
  int original_var_count = 0;       // var ids below this are observable
};

// Peharz-style augmentation with region-shared latents: latent indicators
// multiply into each member's k-th child; a uniform twin sum multiplies into
// every ancestor-sum child whose subtree holds no member of the region.
AugmentedCircuit augment(const Circuit& spn, const LatentAssignment& la);

// Ancestor sums whose children do not all reach the same subset of
// {ref, twin(ref)} in the augmented circuit.  ref must be a member sum or an
// observable leaf (Terminal or observable Indicator).
std::vector<int> conditioning_ancestors(const AugmentedCircuit& aug, int ref);

struct DecompiledBn {
  BayesNet bn;
  std::vector<int> latent_of_bnnode;  // latent index, -1 for observables
  std::vector<NodeId> var_of_bnnode;  // observable var id, -1 for latents
  std::vector<int> bnnode_of_latent;
  std::unordered_map<NodeId, int> bnnode_of_var;
};

// Structure only: one BN node per latent and per observable variable; an edge
// from latent(S') for every conditioning ancestor S' of every target node.
DecompiledBn build_imap(const AugmentedCircuit& aug);

// CPT rows: the weight vector of the member sum (or terminal distribution)
// selected by each conditioning-parent assignment; uniform when no member is
// selected.
void extract_cpts(const AugmentedCircuit& aug, DecompiledBn& out);

DecompiledBn spn2bn(const Circuit& spn, RegionPolicy policy = RegionPolicy::LayerLocal);

// Decompilation keeping the augmentation around, for verification.
struct Decompilation {
  AugmentedCircuit aug;
  DecompiledBn result;
  LatentAssignment assignment;
};
Decompilation decompile(const Circuit& spn, RegionPolicy policy = RegionPolicy::LayerLocal);

// Brute-force table over all observables and latents of the augmented circuit.
JointTable augmented_joint(const AugmentedCircuit& aug, std::size_t cap = kDefaultJointCap);

}  // namespace spnbn

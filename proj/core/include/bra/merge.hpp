#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bra/bif.hpp"
#include "bra/binding.hpp"
#include "bra/hcd.hpp"

namespace bra {

struct SharedPair {
  std::string circuit;
  std::string component_a;
  std::string component_b;

  bool operator==(const SharedPair&) const = default;
};

/// Rewrites component_map targets to the first listed group circuit that
/// contains them, so sharing can be detected at a coarser membership
/// level. Targets outside every group are left unchanged.
BraMapping lift_mapping(const Bif& bif, BraMapping mapping,
                        const std::vector<std::string>& groups);

/// Components of the two mappings hitting the identical circuit id,
/// sorted by circuit id. Throws when the mappings target different BIFs.
std::vector<SharedPair> merge_scan(const BraMapping& a, const BraMapping& b);

enum class MergePolicy { select_by_fidelity, redesign };

std::string_view to_string(MergePolicy p);

struct MergeDecision {
  SharedPair pair;
  MergePolicy strategy = MergePolicy::select_by_fidelity;
  std::string survivor;  // merged component id
  bool tie = false;      // equal scores, side A chosen
  double score_a = 0.0;
  double score_b = 0.0;
  bool semantic_conflict = false;  // corresponding ports disagree on semantics

  bool operator==(const MergeDecision&) const = default;
};

struct MergePlan {
  std::vector<MergeDecision> decisions;
  std::vector<std::string> renames;  // "hcd:component:old -> new"
  Hcd merged;
};

/// select_by_fidelity keeps the higher-scored side per pair (tie -> A,
/// flagged); redesign emits a placeholder union component marked TODO.
/// All links of both HCDs are rewired onto the merged components.
/// Throws when scores are missing under select_by_fidelity.
MergePlan plan_merge(const Hcd& hcd_a, const Hcd& hcd_b,
                     const std::vector<SharedPair>& shared,
                     const std::map<std::string, double>* scores_a,
                     const std::map<std::string, double>* scores_b,
                     MergePolicy policy);

}  // namespace bra

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bra/bif.hpp"
#include "bra/harness.hpp"
#include "bra/hcd.hpp"

namespace bra {

// Static shape of an implementation, with its declared mapping onto BIF
// circuits.
struct ImplGraph {
  std::set<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::string, std::string> mapping;  // node -> circuit id

  bool operator==(const ImplGraph&) const = default;
};

// Precision/recall formalization of structural similarity; 0/0 cases are
// defined as 0 so every score is total.
struct StructuralScores {
  double node_precision = 0.0;
  double node_recall = 0.0;
  double edge_precision = 0.0;
  double edge_recall = 0.0;
  double f1_node = 0.0;
  double f1_edge = 0.0;
  double combined = 0.0;  // (f1_node + f1_edge) / 2
};

/// Throws BraError on an empty ROI.
StructuralScores structural_similarity(const ImplGraph& impl, const Bif& bif,
                                       const std::set<std::string>& roi);

struct BehaviorConstraint {
  enum class Kind {
    before,  // source port activates strictly before the target component
    within,  // target component activates within k steps of the source
  };

  std::string link_id;
  Kind kind = Kind::before;
  int k = 1;

  bool operator==(const BehaviorConstraint&) const = default;
};

/// Fraction of satisfied constraints; an empty list is vacuously 1.0.
/// Throws on unknown link ids.
double functional_similarity(const Trace& trace, const Hcd& hcd,
                             const std::vector<BehaviorConstraint>& constraints);

struct PairingEntry {
  std::string component;
  std::string port;
  std::string ref_component;
  std::string ref_port;

  bool operator==(const PairingEntry&) const = default;
};

struct ActivityResult {
  double mean = 0.0;
  std::vector<double> per_pair;
};

/// Mean Jaccard overlap of active-step sets after binarizing both series
/// at `threshold`; empty-vs-empty pairs score 1.0. Series are truncated
/// to the shorter trace. Throws on an empty pairing.
ActivityResult activity_reproducibility(const Trace& trace,
                                        const Trace& reference,
                                        const std::vector<PairingEntry>& pairing,
                                        double threshold = 0.5);

struct Task {
  std::string name;
  Schedule schedule;
  int steps = 1;
  std::uint64_t seed = 0;
  GoalPredicate goal;
};

struct TaskResult {
  std::string name;
  bool passed = false;
  std::string cause;  // harness error, when any
};

struct PerformanceResult {
  std::vector<TaskResult> tasks;
  double rate = 0.0;  // passes / tasks
};

/// Runs the harness per task; harness errors are recorded as failures
/// with their cause and never abort the suite. Throws on an empty suite.
PerformanceResult performance_eval(const Hcd& hcd, const StubBindings& bindings,
                                   const std::vector<Task>& suite);

}  // namespace bra

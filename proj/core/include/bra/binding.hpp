#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bra/bif.hpp"
#include "bra/harness.hpp"
#include "bra/hcd.hpp"

namespace bra {

class Registry;

// HCD <-> BIF association. Evidence is keyed "<component id>:<claim index>".
struct BraMapping {
  std::string hcd_id;
  std::string bif_id;
  std::set<std::string> roi;
  std::map<std::string, std::string> component_map;  // component -> circuit
  std::map<std::string, std::string> link_map;       // link -> connection
  std::map<std::string, std::vector<Citation>> evidence;

  bool operator==(const BraMapping&) const = default;
};

// Sign-compatibility between a circuit's sign and a claim's required
// sign. Shipped default: equal signs pass, unknown circuit sign passes
// with a warning, anything else fails. Overridable as data.
struct SignCompatibility {
  enum class Verdict { ok, warn, fail };

  std::map<std::pair<Sign, Sign>, Verdict> table;  // (circuit, claim)

  [[nodiscard]] Verdict lookup(Sign circuit, Sign claim) const;
  static SignCompatibility defaults();
};

/// Aspect 1: every dependency link must map to a direct connection whose
/// origin lies in the source component's uniform leaves and whose
/// destination intersects the target component's circuit.
ValidationReport check_structural_consistency(const Bif& bif, const Hcd& hcd,
                                              const BraMapping& mapping);

/// Aspect 2: behavior claims with sign requirements against the mapped
/// circuit's sign; claims without evidence are flagged "unsupported-claim".
ValidationReport check_behavior_consistency(
    const Bif& bif, const Hcd& hcd, const BraMapping& mapping,
    const SignCompatibility& compat = SignCompatibility::defaults());

// Aspect 3 milestone: `event` is a provided-port name; the milestone is
// the port's first nonzero step.
struct Milestone {
  std::string component;
  std::string event;

  bool operator==(const Milestone&) const = default;
};

/// Aspect 3: milestone first-activation steps must be non-decreasing in
/// list order; reports the first violated constraint. Throws when the
/// trace was produced for a different HCD.
ValidationReport check_process_consistency(const Hcd& hcd, const Trace& trace,
                                           const std::vector<Milestone>& milestones);

enum class FunctionalityStatus { achieved, not_achieved, not_executable };

std::string_view to_string(FunctionalityStatus s);

struct FunctionalityVerdict {
  FunctionalityStatus status = FunctionalityStatus::not_executable;
  std::string cause;  // set for not_executable
  std::optional<Trace> trace;
};

struct HarnessConfig {
  StubBindings bindings;
  Schedule schedule;
  int steps = 1;
  std::uint64_t seed = 0;
};

/// Runs the stub harness and evaluates the HCD's goal predicate on the
/// resulting trace. Harness errors surface as not_executable with cause.
FunctionalityVerdict check_functionality(const Bif& bif, const Hcd& hcd,
                                         const BraMapping& mapping,
                                         const HarnessConfig& config);

struct AdequacyReport {
  ValidationReport findings;  // every sub-check, rule names prefixed by aspect
  std::optional<FunctionalityStatus> functionality;
  bool certifiable = false;  // no error-severity findings
};

/// Aggregates BIF novelty/authenticity, HCD validity, functionality (when
/// a trace is supplied) and consistency aspects 1-3 into one report.
/// `store`, `trace` and `schedule` may be null; milestones default to
/// none (vacuous). The schedule is only needed for input-relative goal
/// predicates.
AdequacyReport evaluate_adequacy(const Bif& bif, const Hcd& hcd,
                                 const BraMapping& mapping,
                                 const Registry* store, const Trace* trace,
                                 const std::vector<Milestone>& milestones = {},
                                 const Schedule* schedule = nullptr);

}  // namespace bra

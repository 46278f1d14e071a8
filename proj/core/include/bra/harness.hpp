#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bra/hcd.hpp"

namespace bra {

// Rule-based component behavior. All kinds are scalar: one output value
// per step, broadcast to every provided port of the component.
struct StubSpec {
  enum class Kind {
    constant,   // emits `value` at every step, including step 0
    relay,      // output(t) = input(t-1)
    delay,      // output(t) = input(t-k)
    sum,        // sum of all required-port inputs at t-1
    threshold,  // 1.0 when summed input at t-1 >= theta, else 0.0
    gate,       // first port = data, second = control; data when control
                // is active at t-1, else 0.0
    table,      // binarized input pattern (sorted port order) -> value
  };

  Kind kind = Kind::relay;
  double value = 0.0;                          // constant
  int k = 1;                                   // delay
  double theta = 0.5;                          // threshold
  std::map<std::string, double> table_entries;  // keys are bit strings
  int arity = 1;  // must match the component's provided-port count

  bool operator==(const StubSpec&) const = default;
};

using StubBindings = std::map<std::string, StubSpec>;  // component id -> stub

// External input values, keyed by external-input name; one value per step.
using Schedule = std::map<std::string, std::vector<double>>;

struct TraceRecord {
  int t = 0;
  std::string component;
  std::string port;
  double value = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

// Complete grid: one record for every (t, provided port) pair,
// sorted by (t, component, port).
struct Trace {
  std::string hcd_id;
  int steps = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<TraceRecord> records;

  /// Value of a provided port at a step; throws BraError when absent.
  [[nodiscard]] double value_at(int t, const std::string& component,
                                const std::string& port) const;

  /// First step at which the port value is >= threshold, or -1.
  [[nodiscard]] int first_active(const std::string& component,
                                 const std::string& port,
                                 double threshold = 0.5) const;

  bool operator==(const Trace&) const = default;
};

/// Synchronous fixed-step execution: outputs at step t are computed from
/// inputs at step t-1; step-0 outputs are 0.0 except for constant stubs.
/// Identical (hcd, bindings, schedule, steps, seed) gives an identical
/// trace. Throws BraError for unbound components, arity mismatches and
/// schedule gaps, naming the offender.
Trace run(const Hcd& hcd, const StubBindings& bindings,
          const Schedule& schedule, int steps, std::uint64_t seed);

/// Copy with the listed components and their incident links removed.
/// External ports of surviving components are preserved even when no
/// longer reachable. Throws on unknown ids.
Hcd ablate(const Hcd& hcd, const std::vector<std::string>& component_ids);

/// Rebinds one component; throws on arity mismatch with the component's
/// provided ports.
StubBindings replace_stub(const Hcd& hcd, StubBindings bindings,
                          const std::string& component_id, StubSpec stub);

/// True when the goal predicate holds on the trace. `schedule` is needed
/// for port_active_after_input (the reference step comes from the
/// external input series). Activation threshold is 0.5.
bool goal_achieved(const GoalPredicate& goal, const Trace& trace,
                   const Schedule& schedule);

}  // namespace bra

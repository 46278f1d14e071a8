#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bra/common.hpp"

namespace bra {

struct PortSpec {
  std::string name;
  std::string signal_semantics;

  bool operator==(const PortSpec&) const = default;
};

struct BehaviorClaim {
  std::string claim;
  std::optional<Sign> sign;  // required sign of the hosting circuit

  bool operator==(const BehaviorClaim&) const = default;
};

struct Component {
  std::string id;
  std::string function_label;
  std::vector<PortSpec> provided_ports;
  std::vector<PortSpec> required_ports;
  std::vector<BehaviorClaim> behavior_claims;
  std::optional<std::string> stub_ref;

  [[nodiscard]] const PortSpec* find_provided(const std::string& name) const;
  [[nodiscard]] const PortSpec* find_required(const std::string& name) const;

  bool operator==(const Component&) const = default;
};

struct PortRef {
  std::string component;
  std::string port;

  auto operator<=>(const PortRef&) const = default;
};

struct DependencyLink {
  std::string id;
  PortRef from;  // provided port of the source component
  PortRef to;    // required port of the target component
  std::string signal_semantics;

  bool operator==(const DependencyLink&) const = default;
};

// Machine-checkable form of the top-level-function goal, evaluated on a
// harness trace.
struct GoalPredicate {
  enum class Kind {
    none,
    port_active_by,           // port active at some step <= deadline
    port_active_after_input,  // port activates within `within` steps of the
                              // first active step of a named external input
  };

  std::string id;
  Kind kind = Kind::none;
  std::string component;
  std::string port;
  int deadline = 0;
  std::string input;
  int within = 0;

  bool operator==(const GoalPredicate&) const = default;
};

struct Tlf {
  std::string goal;  // human statement
  GoalPredicate predicate;

  bool operator==(const Tlf&) const = default;
};

struct ExternalPort {
  std::string name;
  std::string component;
  std::string port;

  bool operator==(const ExternalPort&) const = default;
};

struct Hcd {
  std::string id;
  Tlf tlf;
  bool fragment = false;
  std::map<std::string, Component> components;
  std::map<std::string, DependencyLink> links;
  std::vector<ExternalPort> external_inputs;   // feed required ports
  std::vector<ExternalPort> external_outputs;  // read provided ports

  [[nodiscard]] const Component* find_component(const std::string& id) const;

  bool operator==(const Hcd&) const = default;
};

struct DependencyEdge {
  std::string from;
  std::string to;
  std::string link_id;

  auto operator<=>(const DependencyEdge&) const = default;
};

struct DependencyGraph {
  std::vector<std::string> nodes;       // sorted component ids
  std::vector<DependencyEdge> edges;    // sorted, parallel links preserved
};

/// Reports dangling ports, orphan components, unreachable externals.
/// The diagram port-naming convention (single-output port named after the
/// function label) is a warning, never an error.
ValidationReport validate_hcd(const Hcd& hcd);

/// Directed multigraph over component ids. Throws BraError when the HCD
/// has error-severity validation findings.
DependencyGraph dependency_graph(const Hcd& hcd);

/// True when `from` can reach `to` along dependency links (a component
/// reaches itself).
bool component_reaches(const Hcd& hcd, const std::string& from,
                       const std::string& to);

}  // namespace bra

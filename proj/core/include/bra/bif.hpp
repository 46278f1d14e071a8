#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bra/common.hpp"

namespace bra {

// A node of the brain information flow graph. Uniform circuits are the
// leaves (homogeneous neuron populations); composite circuits group other
// circuits via `members` and may nest and overlap.
struct CircuitNode {
  std::string id;
  std::string label;  // hierarchical region label, "/"-separated
  Species species = Species::unknown;
  bool neocortical = false;
  bool is_uniform = true;
  std::vector<std::string> members;  // composite only; empty for uniform

  // Uniform-circuit attributes.
  Transmitter transmitter = Transmitter::unknown;
  Sign sign = Sign::unknown;
  std::optional<std::uint64_t> cell_count;

  std::vector<Citation> references;

  bool operator==(const CircuitNode&) const = default;
};

// Directed attributed link. The origin (`input`) is always a uniform
// circuit; the destination may be composite, resolution to receiving
// uniform circuits is deferred to mapping time.
struct Connection {
  std::string id;
  std::string input;   // uniform circuit id
  std::string output;  // circuit id (uniform or composite)
  Species species = Species::unknown;
  std::optional<std::uint64_t> size;  // axon count
  Transmitter transmitter = Transmitter::unknown;
  Hierarchy hierarchy = Hierarchy::na;
  std::vector<Citation> references;

  bool operator==(const Connection&) const = default;
};

struct BifMetadata {
  std::string version;
  std::string provenance;

  bool operator==(const BifMetadata&) const = default;
};

struct Bif {
  BifMetadata metadata;
  std::map<std::string, CircuitNode> circuits;
  std::map<std::string, Connection> connections;

  [[nodiscard]] const CircuitNode* find_circuit(const std::string& id) const;
  [[nodiscard]] const Connection* find_connection(const std::string& id) const;

  bool operator==(const Bif&) const = default;
};

struct RoiExtract {
  Bif sub;
  // Connections crossing the ROI boundary, by id, sorted.
  std::vector<std::string> afferents;  // output inside, input outside
  std::vector<std::string> efferents;  // input inside, output outside
};

/// Structural and attribute validation of a whole document. Severity
/// "error" for structural breaks, "warning" for chimeric species mixes
/// and out-of-context hierarchy flags.
ValidationReport validate_bif(const Bif& bif);

/// Transitive uniform-circuit leaves of a circuit, sorted by id.
/// A uniform circuit yields itself. Throws BraError on unknown id.
std::vector<std::string> uniform_leaves(const Bif& bif,
                                        const std::string& circuit_id);

/// Membership closure of a set of circuit ids (the ids themselves plus
/// everything reachable downward), sorted. Throws on unknown ids.
std::set<std::string> membership_closure(const Bif& bif,
                                         const std::set<std::string>& roi);

/// Induced sub-BIF of the closure of `roi`, with boundary-crossing
/// connections listed separately as the ROI's external interface.
RoiExtract roi_extract(const Bif& bif, const std::set<std::string>& roi);

/// Circuit ids whose label starts with `prefix`, sorted.
std::vector<std::string> find_by_label_prefix(const Bif& bif,
                                              const std::string& prefix);

/// round(projection_ratio * neuron_count), half away from zero.
/// Throws BraError when the ratio is outside [0,1].
std::uint64_t estimate_axon_count(double projection_ratio,
                                  std::uint64_t neuron_count);

}  // namespace bra

#include "bra/bif.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bra {

const CircuitNode* Bif::find_circuit(const std::string& id) const {
  auto it = circuits.find(id);
  return it == circuits.end() ? nullptr : &it->second;
}

const Connection* Bif::find_connection(const std::string& id) const {
  auto it = connections.find(id);
  return it == connections.end() ? nullptr : &it->second;
}

namespace {

enum class CycleMark { unvisited, in_progress, done };

// Returns true when a membership cycle passes through `id`.
bool detect_cycle(const Bif& bif, const std::string& id,
                  std::map<std::string, CycleMark>& marks) {
  auto& mark = marks[id];
  if (mark == CycleMark::done) return false;
  if (mark == CycleMark::in_progress) return true;
  mark = CycleMark::in_progress;
  if (const CircuitNode* node = bif.find_circuit(id)) {
    for (const auto& member : node->members) {
      if (bif.find_circuit(member) && detect_cycle(bif, member, marks)) {
        marks[id] = CycleMark::done;
        return true;
      }
    }
  }
  marks[id] = CycleMark::done;
  return false;
}

}  // namespace

ValidationReport validate_bif(const Bif& bif) {
  ValidationReport report;

  std::map<std::string, CycleMark> marks;
  for (const auto& [id, node] : bif.circuits) {
    if (node.is_uniform) {
      if (node.cell_count && *node.cell_count == 0) {
        report.add(id, "non-positive-cell-count", Severity::error,
                   "cell_count must be >= 1 when present");
      }
      continue;
    }
    if (node.members.empty()) {
      report.add(id, "empty-composite", Severity::error,
                 "composite circuit has no members; every membership leaf "
                 "must be a uniform circuit");
    }
    for (const auto& member : node.members) {
      if (!bif.find_circuit(member)) {
        report.add(id, "dangling-member", Severity::error,
                   "member '" + member + "' does not exist");
      }
    }
    std::map<std::string, CycleMark> local;
    if (detect_cycle(bif, id, local)) {
      report.add(id, "membership-cycle", Severity::error,
                 "membership graph contains a cycle through '" + id + "'");
    }
  }

  for (const auto& [id, conn] : bif.connections) {
    const CircuitNode* in = bif.find_circuit(conn.input);
    const CircuitNode* out = bif.find_circuit(conn.output);
    if (!in) {
      report.add(id, "dangling-endpoint", Severity::error,
                 "input circuit '" + conn.input + "' does not exist");
    }
    if (!out) {
      report.add(id, "dangling-endpoint", Severity::error,
                 "output circuit '" + conn.output + "' does not exist");
    }
    if (in && !in->is_uniform) {
      report.add(id, "input-not-uniform", Severity::error,
                 "connection origin '" + conn.input +
                     "' is a composite circuit");
    }
    if (conn.size && *conn.size == 0) {
      report.add(id, "non-positive-size", Severity::error,
                 "size must be >= 1 when present");
    }
    if (in && out) {
      const Species a = in->species;
      const Species b = out->species;
      if (a != Species::unknown && b != Species::unknown && a != b) {
        report.add(id, "species-chimera", Severity::warning,
                   "connection joins " + std::string(to_string(a)) + " '" +
                       conn.input + "' to " + std::string(to_string(b)) +
                       " '" + conn.output + "'");
      }
      if (conn.hierarchy != Hierarchy::na &&
          !(in->neocortical && out->neocortical)) {
        report.add(id, "hierarchy-context", Severity::warning,
                   "hierarchy is only meaningful between neocortical "
                   "endpoints");
      }
    }
  }

  return report;
}

std::vector<std::string> uniform_leaves(const Bif& bif,
                                        const std::string& circuit_id) {
  const CircuitNode* root = bif.find_circuit(circuit_id);
  if (!root) throw BraError("unknown circuit id: '" + circuit_id + "'");

  std::set<std::string> leaves;
  std::set<std::string> seen;
  std::function<void(const std::string&)> walk = [&](const std::string& id) {
    if (!seen.insert(id).second) return;
    const CircuitNode* node = bif.find_circuit(id);
    if (!node) throw BraError("unknown circuit id: '" + id + "'");
    if (node->is_uniform) {
      leaves.insert(id);
      return;
    }
    for (const auto& member : node->members) walk(member);
  };
  walk(circuit_id);
  return {leaves.begin(), leaves.end()};
}

std::set<std::string> membership_closure(const Bif& bif,
                                         const std::set<std::string>& roi) {
  std::set<std::string> closure;
  std::function<void(const std::string&)> walk = [&](const std::string& id) {
    if (!closure.insert(id).second) return;
    const CircuitNode* node = bif.find_circuit(id);
    if (!node) throw BraError("unknown circuit id: '" + id + "'");
    for (const auto& member : node->members) walk(member);
  };
  for (const auto& id : roi) walk(id);
  return closure;
}

RoiExtract roi_extract(const Bif& bif, const std::set<std::string>& roi) {
  const std::set<std::string> inside = membership_closure(bif, roi);

  RoiExtract result;
  result.sub.metadata = bif.metadata;
  for (const auto& id : inside) {
    result.sub.circuits.emplace(id, bif.circuits.at(id));
  }
  for (const auto& [id, conn] : bif.connections) {
    const bool in_inside = inside.contains(conn.input);
    const bool out_inside = inside.contains(conn.output);
    if (in_inside && out_inside) {
      result.sub.connections.emplace(id, conn);
    } else if (out_inside) {
      result.afferents.push_back(id);
    } else if (in_inside) {
      result.efferents.push_back(id);
    }
  }
  return result;
}

std::vector<std::string> find_by_label_prefix(const Bif& bif,
                                              const std::string& prefix) {
  std::vector<std::string> ids;
  for (const auto& [id, node] : bif.circuits) {
    if (node.label.starts_with(prefix)) ids.push_back(id);
  }
  return ids;
}

std::uint64_t estimate_axon_count(double projection_ratio,
                                  std::uint64_t neuron_count) {
  if (!(projection_ratio >= 0.0 && projection_ratio <= 1.0)) {
    throw BraError("projection ratio must lie in [0,1]");
  }
  // llround rounds halfway cases away from zero.
  return static_cast<std::uint64_t>(
      std::llround(projection_ratio * static_cast<double>(neuron_count)));
}

}  // namespace bra

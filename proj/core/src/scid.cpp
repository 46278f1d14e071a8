#include "bra/scid.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <thread>

namespace bra {

const Role* FunctionTemplate::find_role(const std::string& id) const {
  for (const auto& r : roles) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

ValidationReport validate_template(const FunctionTemplate& tmpl) {
  ValidationReport report;
  std::set<std::string> ids;
  for (const auto& role : tmpl.roles) {
    if (!ids.insert(role.id).second) {
      report.add(role.id, "duplicate-role", Severity::error,
                 "role id declared twice");
    }
  }
  for (std::size_t i = 0; i < tmpl.role_edges.size(); ++i) {
    const RoleEdge& edge = tmpl.role_edges[i];
    const std::string where = "edge#" + std::to_string(i);
    if (!ids.contains(edge.from)) {
      report.add(where, "dangling-role", Severity::error,
                 "from-role '" + edge.from + "' not declared");
    }
    if (!ids.contains(edge.to)) {
      report.add(where, "dangling-role", Severity::error,
                 "to-role '" + edge.to + "' not declared");
    }
    if (edge.constraint.max_path_len < 1) {
      report.add(where, "invalid-path-len", Severity::error,
                 "max_path_len must be >= 1");
    }
  }
  for (const auto& ext : tmpl.externals) {
    if (!ids.contains(ext.role)) {
      report.add(ext.name, "dangling-role", Severity::error,
                 "external binding targets undeclared role '" + ext.role + "'");
    }
  }
  return report;
}

std::string_view to_string(FindingField f) {
  switch (f) {
    case FindingField::neuroscience:
      return "neuroscience";
    case FindingField::cognitive_psychology:
      return "cognitive-psychology";
    case FindingField::evolution:
      return "evolution";
    case FindingField::development:
      return "development";
    case FindingField::other:
      return "other";
  }
  return "other";
}

FindingField finding_field_from_string(std::string_view text) {
  if (text == "neuroscience") return FindingField::neuroscience;
  if (text == "cognitive-psychology") return FindingField::cognitive_psychology;
  if (text == "evolution") return FindingField::evolution;
  if (text == "development") return FindingField::development;
  if (text == "other" || text.empty()) return FindingField::other;
  throw BraError("unrecognized field of finding: '" + std::string(text) + "'");
}

namespace {

// In-ROI hop: a connection from its origin uniform circuit to each
// uniform leaf of its destination.
struct Hop {
  std::string to;       // uniform circuit id
  std::string conn_id;  // connection realizing the hop
  Sign origin_sign = Sign::unknown;
};

struct RoiIndex {
  std::vector<std::string> leaves;                 // sorted uniform circuits
  std::map<std::string, std::vector<Hop>> adjacency;  // from -> sorted hops
  const Bif* bif = nullptr;
};

RoiIndex build_index(const Bif& bif, const std::set<std::string>& roi) {
  if (roi.empty()) throw BraError("ROI must not be empty");
  const std::set<std::string> inside = membership_closure(bif, roi);

  RoiIndex index;
  index.bif = &bif;
  for (const auto& id : inside) {
    const CircuitNode& node = bif.circuits.at(id);
    if (node.is_uniform) index.leaves.push_back(id);
  }

  for (const auto& [cid, conn] : bif.connections) {
    if (!inside.contains(conn.input) || !inside.contains(conn.output)) {
      continue;
    }
    const CircuitNode* origin = bif.find_circuit(conn.input);
    if (!origin || !origin->is_uniform) continue;
    for (const auto& leaf : uniform_leaves(bif, conn.output)) {
      index.adjacency[conn.input].push_back({leaf, cid, origin->sign});
    }
  }
  for (auto& [from, hops] : index.adjacency) {
    std::sort(hops.begin(), hops.end(), [](const Hop& a, const Hop& b) {
      return std::tie(a.conn_id, a.to) < std::tie(b.conn_id, b.to);
    });
  }
  return index;
}

// Shortest compatible connection path, ties broken by lexicographic
// connection-id sequence (BFS expands hops in sorted order).
std::optional<std::vector<std::string>> find_path(
    const RoiIndex& index, const std::string& from, const std::string& to,
    int max_len, const std::optional<Sign>& required_sign) {
  struct Node {
    std::string at;
    std::vector<std::string> path;
  };
  std::deque<Node> frontier{{from, {}}};
  std::set<std::string> visited{from};
  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (static_cast<int>(node.path.size()) >= max_len) continue;
    auto it = index.adjacency.find(node.at);
    if (it == index.adjacency.end()) continue;
    for (const Hop& hop : it->second) {
      if (required_sign && hop.origin_sign != *required_sign) continue;
      std::vector<std::string> path = node.path;
      path.push_back(hop.conn_id);
      if (hop.to == to) return path;
      if (visited.insert(hop.to).second) {
        frontier.push_back({hop.to, std::move(path)});
      }
    }
  }
  return std::nullopt;
}

bool node_constraint_satisfied(const NodeConstraint& c,
                               const CircuitNode& node) {
  if (!c.allowed_signs.empty() && !c.allowed_signs.contains(node.sign)) {
    return false;
  }
  if (!c.allowed_transmitters.empty() &&
      !c.allowed_transmitters.contains(node.transmitter)) {
    return false;
  }
  if (c.min_cell_count) {
    // An unknown cell count cannot demonstrate the minimum.
    if (!node.cell_count || *node.cell_count < *c.min_cell_count) return false;
  }
  return true;
}

int effective_max_len(const EdgeConstraint& c, int cap) {
  return cap > 0 ? std::min(c.max_path_len, cap) : c.max_path_len;
}

// Depth-first assignment of roles in template order over sorted circuit
// ids; checks every edge whose endpoints are both assigned, so the
// output order is lexicographic by construction.
void enumerate_from(const FunctionTemplate& tmpl, const RoiIndex& index,
                    const EnumerationOptions& opts, std::size_t role_index,
                    std::map<std::string, std::string>& assignment,
                    std::set<std::string>& used,
                    std::vector<CandidateHcd>& out) {
  if (role_index == tmpl.roles.size()) {
    CandidateHcd candidate;
    candidate.assignment = assignment;
    for (std::size_t i = 0; i < tmpl.role_edges.size(); ++i) {
      const RoleEdge& edge = tmpl.role_edges[i];
      auto path = find_path(index, assignment.at(edge.from),
                            assignment.at(edge.to),
                            effective_max_len(edge.constraint,
                                              opts.max_path_len_cap),
                            edge.constraint.required_sign);
      candidate.realized_edges[i] = std::move(*path);
    }
    out.push_back(std::move(candidate));
    return;
  }

  const Role& role = tmpl.roles[role_index];
  for (const auto& leaf : index.leaves) {
    if (opts.injective && used.contains(leaf)) continue;
    if (!node_constraint_satisfied(role.constraint,
                                   index.bif->circuits.at(leaf))) {
      continue;
    }
    assignment[role.id] = leaf;
    used.insert(leaf);

    bool edges_ok = true;
    for (const auto& edge : tmpl.role_edges) {
      auto from_it = assignment.find(edge.from);
      auto to_it = assignment.find(edge.to);
      if (from_it == assignment.end() || to_it == assignment.end()) continue;
      if (!find_path(index, from_it->second, to_it->second,
                     effective_max_len(edge.constraint, opts.max_path_len_cap),
                     edge.constraint.required_sign)) {
        edges_ok = false;
        break;
      }
    }
    if (edges_ok) {
      enumerate_from(tmpl, index, opts, role_index + 1, assignment, used, out);
    }

    used.erase(leaf);
    assignment.erase(role.id);
  }
}

}  // namespace

FeasibilityVerdict check_io_feasibility(const Bif& bif,
                                        const std::set<std::string>& roi,
                                        const FunctionTemplate& tmpl) {
  if (roi.empty()) throw BraError("ROI must not be empty");
  const RoiExtract extract = roi_extract(bif, roi);

  FeasibilityVerdict verdict;
  for (const auto& ext : tmpl.externals) {
    const bool bindable = ext.direction == ExternalDirection::afferent
                              ? !extract.afferents.empty()
                              : !extract.efferents.empty();
    if (!bindable) verdict.unbindable.push_back(ext.name);
  }
  verdict.feasible = verdict.unbindable.empty();
  return verdict;
}

EnumerationResult enumerate_candidates(const Bif& bif,
                                       const std::set<std::string>& roi,
                                       const FunctionTemplate& tmpl,
                                       const EnumerationOptions& opts) {
  {
    const ValidationReport tmpl_report = validate_template(tmpl);
    if (tmpl_report.has_errors()) {
      throw BraError("template '" + tmpl.id + "' is invalid: " +
                     tmpl_report.findings.front().message);
    }
  }
  const RoiIndex index = build_index(bif, roi);
  if (index.leaves.size() > opts.leaf_bound) {
    throw BraError("ROI has " + std::to_string(index.leaves.size()) +
                   " uniform circuits, above the bound of " +
                   std::to_string(opts.leaf_bound) +
                   "; narrow the ROI or raise the bound");
  }

  std::vector<CandidateHcd> all;
  if (tmpl.roles.empty()) {
    all.push_back(CandidateHcd{});
  } else if (opts.jobs <= 1) {
    std::map<std::string, std::string> assignment;
    std::set<std::string> used;
    enumerate_from(tmpl, index, opts, 0, assignment, used, all);
  } else {
    // Partition by the first role's anchor circuit; per-anchor results are
    // concatenated in anchor order, so output is independent of jobs.
    std::vector<std::vector<CandidateHcd>> buckets(index.leaves.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= index.leaves.size()) return;
        const Role& first = tmpl.roles.front();
        const std::string& leaf = index.leaves[i];
        if (!node_constraint_satisfied(first.constraint,
                                       index.bif->circuits.at(leaf))) {
          continue;
        }
        std::map<std::string, std::string> assignment{{first.id, leaf}};
        std::set<std::string> used{leaf};
        bool ok = true;
        for (const auto& edge : tmpl.role_edges) {
          if (edge.from == first.id && edge.to == first.id &&
              !find_path(index, leaf, leaf,
                         effective_max_len(edge.constraint,
                                           opts.max_path_len_cap),
                         edge.constraint.required_sign)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        enumerate_from(tmpl, index, opts, 1, assignment, used, buckets[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < opts.jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& bucket : buckets) {
      std::move(bucket.begin(), bucket.end(), std::back_inserter(all));
    }
  }

  EnumerationResult result;
  if (opts.limit && all.size() > *opts.limit) {
    all.resize(*opts.limit);
    result.truncated = true;
  }
  result.candidates = std::move(all);
  return result;
}

namespace {

std::string attribute_value(const CircuitNode& node,
                            const std::string& attribute,
                            const std::string& rule_id) {
  if (attribute == "sign") return std::string(to_string(node.sign));
  if (attribute == "transmitter") return std::string(to_string(node.transmitter));
  if (attribute == "species") return std::string(to_string(node.species));
  throw BraError("rule '" + rule_id + "': unknown attribute '" + attribute +
                 "'");
}

const std::string& role_target(const CandidateHcd& candidate,
                               const std::string& role,
                               const std::string& rule_id) {
  auto it = candidate.assignment.find(role);
  if (it == candidate.assignment.end()) {
    throw BraError("rule '" + rule_id + "': unknown role '" + role + "'");
  }
  return it->second;
}

bool predicate_holds(const Bif& bif, const RoiIndex& index,
                     const CandidateHcd& candidate,
                     const RejectionPredicate& p, const std::string& rule_id) {
  bool value = false;
  switch (p.kind) {
    case RejectionPredicate::Kind::role_attribute: {
      const std::string& circuit = role_target(candidate, p.role, rule_id);
      value = p.values.contains(
          attribute_value(bif.circuits.at(circuit), p.attribute, rule_id));
      break;
    }
    case RejectionPredicate::Kind::co_location: {
      const std::string& a = role_target(candidate, p.role_a, rule_id);
      const std::string& b = role_target(candidate, p.role_b, rule_id);
      if (!bif.find_circuit(p.circuit)) {
        throw BraError("rule '" + rule_id + "': unknown circuit '" + p.circuit +
                       "'");
      }
      const auto leaves = uniform_leaves(bif, p.circuit);
      value = std::binary_search(leaves.begin(), leaves.end(), a) &&
              std::binary_search(leaves.begin(), leaves.end(), b);
      break;
    }
    case RejectionPredicate::Kind::path_exists: {
      const std::string& a = role_target(candidate, p.role_a, rule_id);
      const std::string& b = role_target(candidate, p.role_b, rule_id);
      if (p.max_len < 1) {
        throw BraError("rule '" + rule_id + "': max_len must be >= 1");
      }
      value = find_path(index, a, b, p.max_len, std::nullopt).has_value();
      break;
    }
  }
  return p.negate ? !value : value;
}

}  // namespace

std::vector<CandidateHcd> apply_rejection_rules(
    const Bif& bif, const std::set<std::string>& roi,
    std::vector<CandidateHcd> candidates,
    const std::vector<RejectionRule>& rules) {
  const RoiIndex index = build_index(bif, roi);
  for (auto& candidate : candidates) {
    candidate.status = CandidateHcd::Status::surviving;
    candidate.rejected_by.clear();
    for (const auto& rule : rules) {
      if (predicate_holds(bif, index, candidate, rule.predicate, rule.id)) {
        candidate.status = CandidateHcd::Status::rejected;
        candidate.rejected_by = rule.id;
        break;
      }
    }
  }
  return candidates;
}

std::vector<CandidateHcd> rank_candidates(
    const Bif& bif, const std::set<std::string>& roi,
    std::vector<CandidateHcd> surviving,
    const std::vector<SoftConstraint>& soft_constraints) {
  const RoiIndex index = build_index(bif, roi);
  for (auto& candidate : surviving) {
    candidate.score = 0.0;
    for (const auto& soft : soft_constraints) {
      if (predicate_holds(bif, index, candidate, soft.predicate, soft.id)) {
        candidate.score += soft.weight;
      }
    }
  }
  std::stable_sort(surviving.begin(), surviving.end(),
                   [](const CandidateHcd& a, const CandidateHcd& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.assignment < b.assignment;
                   });
  return surviving;
}

std::pair<Hcd, BraMapping> materialize_hcd(const Bif& bif,
                                           const CandidateHcd& candidate,
                                           const FunctionTemplate& tmpl,
                                           const std::string& bif_id,
                                           const std::set<std::string>& roi) {
  if (candidate.status == CandidateHcd::Status::rejected) {
    throw BraError("cannot materialize a rejected candidate (rule '" +
                   candidate.rejected_by + "')");
  }

  Hcd hcd;
  hcd.id = tmpl.id.empty() ? "materialized" : tmpl.id + "-materialized";
  hcd.tlf.goal = tmpl.tlf_goal;
  hcd.fragment = true;  // externals are authored later, not synthesized

  BraMapping mapping;
  mapping.hcd_id = hcd.id;
  mapping.bif_id = bif_id;
  mapping.roi = roi;

  for (const auto& role : tmpl.roles) {
    Component comp;
    comp.id = role.id;
    comp.function_label = role.function_label;
    comp.provided_ports.push_back({role.function_label, role.function_label});
    hcd.components.emplace(comp.id, std::move(comp));
    mapping.component_map[role.id] = candidate.assignment.at(role.id);
  }

  // Relay components are shared across edges landing on the same circuit.
  std::map<std::string, std::string> relay_by_circuit;
  auto ensure_relay = [&](const std::string& circuit,
                          const std::string& conn_id,
                          const std::string& semantics) -> std::string {
    auto it = relay_by_circuit.find(circuit);
    if (it != relay_by_circuit.end()) return it->second;
    Component relay;
    relay.id = "relay:" + conn_id;
    relay.function_label = relay.id;
    relay.provided_ports.push_back({relay.id, semantics});
    relay.required_ports.push_back({"in", semantics});
    hcd.components.emplace(relay.id, relay);
    mapping.component_map[relay.id] = circuit;
    relay_by_circuit.emplace(circuit, relay.id);
    return relay.id;
  };

  int link_counter = 0;
  auto add_link = [&](const std::string& from_comp, const std::string& to_comp,
                      const std::string& to_port, const std::string& semantics,
                      const std::string& conn_id) {
    DependencyLink link;
    link.id = "l" + std::to_string(link_counter++);
    link.from = {from_comp,
                 hcd.components.at(from_comp).provided_ports.front().name};
    link.to = {to_comp, to_port};
    link.signal_semantics = semantics;
    mapping.link_map[link.id] = conn_id;
    hcd.links.emplace(link.id, std::move(link));
  };

  for (std::size_t i = 0; i < tmpl.role_edges.size(); ++i) {
    const RoleEdge& edge = tmpl.role_edges[i];
    const auto& path = candidate.realized_edges.at(i);
    const std::string& semantics = edge.constraint.signal_semantics;

    // Required port on the final target, one per incoming edge.
    Component& target = hcd.components.at(edge.to);
    std::string port_name = semantics.empty() ? "in" : semantics;
    while (target.find_required(port_name) || target.find_provided(port_name)) {
      port_name += "'";
    }
    target.required_ports.push_back({port_name, semantics});

    std::string current = edge.from;
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      const Connection& conn = bif.connections.at(path[h]);
      // The hop lands where the next connection originates.
      const Connection& next = bif.connections.at(path[h + 1]);
      const std::string relay_id = ensure_relay(next.input, conn.id, semantics);
      add_link(current, relay_id, "in", semantics, conn.id);
      current = relay_id;
    }
    add_link(current, edge.to, port_name, semantics, path.back());
  }

  return {std::move(hcd), std::move(mapping)};
}

}  // namespace bra

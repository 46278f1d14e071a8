#include "bra/merge.hpp"

#include <algorithm>

namespace bra {

std::string_view to_string(MergePolicy p) {
  return p == MergePolicy::select_by_fidelity ? "select-by-fidelity"
                                              : "redesign";
}

BraMapping lift_mapping(const Bif& bif, BraMapping mapping,
                        const std::vector<std::string>& groups) {
  for (auto& [component, circuit] : mapping.component_map) {
    for (const auto& group : groups) {
      const auto leaves = uniform_leaves(bif, group);
      if (std::binary_search(leaves.begin(), leaves.end(), circuit) ||
          group == circuit) {
        circuit = group;
        break;
      }
    }
  }
  return mapping;
}

std::vector<SharedPair> merge_scan(const BraMapping& a, const BraMapping& b) {
  if (a.bif_id != b.bif_id) {
    throw BraError("mappings target different BIFs: '" + a.bif_id + "' vs '" +
                   b.bif_id + "'");
  }

  // component_map is injective per mapping, so circuit -> component is
  // single-valued on each side.
  std::map<std::string, std::string> by_circuit_a;
  for (const auto& [component, circuit] : a.component_map) {
    by_circuit_a.emplace(circuit, component);
  }

  std::vector<SharedPair> shared;
  for (const auto& [component, circuit] : b.component_map) {
    auto it = by_circuit_a.find(circuit);
    if (it != by_circuit_a.end()) {
      shared.push_back({circuit, it->second, component});
    }
  }
  std::sort(shared.begin(), shared.end(),
            [](const SharedPair& x, const SharedPair& y) {
              return x.circuit < y.circuit;
            });
  return shared;
}

namespace {

double score_for(const std::map<std::string, double>* scores,
                 const std::string& component, const char* side) {
  if (!scores || !scores->contains(component)) {
    throw BraError("select-by-fidelity needs a score for component '" +
                   component + "' on side " + side);
  }
  return scores->at(component);
}

}  // namespace

MergePlan plan_merge(const Hcd& hcd_a, const Hcd& hcd_b,
                     const std::vector<SharedPair>& shared,
                     const std::map<std::string, double>* scores_a,
                     const std::map<std::string, double>* scores_b,
                     MergePolicy policy) {
  MergePlan plan;
  plan.merged.id = hcd_a.id + "+" + hcd_b.id;
  plan.merged.tlf.goal = hcd_a.tlf.goal;
  plan.merged.fragment = hcd_a.fragment || hcd_b.fragment;

  std::map<std::string, std::string> remap_a;  // original -> merged id
  std::map<std::string, std::string> remap_b;
  std::set<std::string> shared_a, shared_b;
  for (const auto& pair : shared) {
    shared_a.insert(pair.component_a);
    shared_b.insert(pair.component_b);
  }

  // Non-shared components carry over unchanged; cross-HCD id collisions
  // on side B are prefixed and recorded.
  for (const auto& [id, comp] : hcd_a.components) {
    if (shared_a.contains(id)) continue;
    plan.merged.components.emplace(id, comp);
    remap_a[id] = id;
  }
  for (const auto& [id, comp] : hcd_b.components) {
    if (shared_b.contains(id)) continue;
    std::string merged_id = id;
    if (plan.merged.components.contains(merged_id)) {
      merged_id = hcd_b.id + ":" + id;
      plan.renames.push_back(hcd_b.id + ":" + id + ": component " + id +
                             " -> " + merged_id);
    }
    Component copy = comp;
    copy.id = merged_id;
    plan.merged.components.emplace(merged_id, std::move(copy));
    remap_b[id] = merged_id;
  }

  // Collapse each shared pair.
  for (const auto& pair : shared) {
    const Component& comp_a = *hcd_a.find_component(pair.component_a);
    const Component& comp_b = *hcd_b.find_component(pair.component_b);

    MergeDecision decision;
    decision.pair = pair;
    decision.strategy = policy;

    Component merged;
    if (policy == MergePolicy::select_by_fidelity) {
      decision.score_a = score_for(scores_a, pair.component_a, "A");
      decision.score_b = score_for(scores_b, pair.component_b, "B");
      decision.tie = decision.score_a == decision.score_b;
      const bool keep_a = decision.score_a >= decision.score_b;  // tie -> A
      merged = keep_a ? comp_a : comp_b;
      decision.survivor = merged.id;
    } else {
      merged.id = pair.component_a + "+" + pair.component_b;
      merged.function_label =
          "redesign: " + comp_a.function_label + " / " + comp_b.function_label;
      merged.behavior_claims.push_back(
          {"TODO: redesign an integrated algorithm for circuit '" +
               pair.circuit + "'",
           std::nullopt});
      decision.survivor = merged.id;
    }

    // Union in the ports the other side's links still need. Same-name
    // ports with differing semantics are prefixed and flag the pair.
    auto absorb_ports = [&](const Component& source, const std::string& hcd_id) {
      auto absorb = [&](const std::vector<PortSpec>& ports, bool provided) {
        for (const auto& port : ports) {
          const PortSpec* existing = provided ? merged.find_provided(port.name)
                                              : merged.find_required(port.name);
          if (existing) {
            if (existing->signal_semantics != port.signal_semantics) {
              decision.semantic_conflict = true;
              PortSpec renamed = port;
              renamed.name = hcd_id + ":" + port.name;
              plan.renames.push_back(hcd_id + ":" + source.id + ":" +
                                     port.name + " -> " + renamed.name);
              (provided ? merged.provided_ports : merged.required_ports)
                  .push_back(std::move(renamed));
            }
            continue;
          }
          (provided ? merged.provided_ports : merged.required_ports)
              .push_back(port);
        }
      };
      absorb(source.provided_ports, true);
      absorb(source.required_ports, false);
    };
    if (policy == MergePolicy::redesign) {
      absorb_ports(comp_a, hcd_a.id);
      absorb_ports(comp_b, hcd_b.id);
    } else if (decision.survivor == comp_a.id) {
      absorb_ports(comp_b, hcd_b.id);
    } else {
      absorb_ports(comp_a, hcd_a.id);
    }

    plan.merged.components.emplace(merged.id, merged);
    remap_a[pair.component_a] = merged.id;
    remap_b[pair.component_b] = merged.id;
    plan.decisions.push_back(std::move(decision));
  }

  // Rewire links and externals of both sources onto the merged ids.
  auto port_after_merge = [&](const std::string& merged_id,
                              const std::string& port,
                              const std::string& hcd_id) -> std::string {
    const Component& comp = plan.merged.components.at(merged_id);
    // A conflict rename for this source takes precedence over a port that
    // merely shares the name.
    const std::string renamed = hcd_id + ":" + port;
    if (comp.find_provided(renamed) || comp.find_required(renamed)) {
      return renamed;
    }
    if (comp.find_provided(port) || comp.find_required(port)) return port;
    return renamed;
  };
  auto rewire = [&](const Hcd& source,
                    const std::map<std::string, std::string>& remap) {
    for (const auto& [id, link] : source.links) {
      DependencyLink moved = link;
      moved.from.component = remap.at(link.from.component);
      moved.to.component = remap.at(link.to.component);
      moved.from.port =
          port_after_merge(moved.from.component, link.from.port, source.id);
      moved.to.port =
          port_after_merge(moved.to.component, link.to.port, source.id);
      std::string link_id = id;
      if (plan.merged.links.contains(link_id)) link_id = source.id + ":" + id;
      moved.id = link_id;
      plan.merged.links.emplace(link_id, std::move(moved));
    }
    for (const auto& ext : source.external_inputs) {
      ExternalPort moved = ext;
      moved.component = remap.at(ext.component);
      moved.port = port_after_merge(moved.component, ext.port, source.id);
      plan.merged.external_inputs.push_back(std::move(moved));
    }
    for (const auto& ext : source.external_outputs) {
      ExternalPort moved = ext;
      moved.component = remap.at(ext.component);
      moved.port = port_after_merge(moved.component, ext.port, source.id);
      plan.merged.external_outputs.push_back(std::move(moved));
    }
  };
  rewire(hcd_a, remap_a);
  rewire(hcd_b, remap_b);

  return plan;
}

}  // namespace bra

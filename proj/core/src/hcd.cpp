#include "bra/hcd.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace bra {

const PortSpec* Component::find_provided(const std::string& name) const {
  for (const auto& p : provided_ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const PortSpec* Component::find_required(const std::string& name) const {
  for (const auto& p : required_ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Component* Hcd::find_component(const std::string& id) const {
  auto it = components.find(id);
  return it == components.end() ? nullptr : &it->second;
}

ValidationReport validate_hcd(const Hcd& hcd) {
  ValidationReport report;

  for (const auto& [id, comp] : hcd.components) {
    std::set<std::string> names;
    for (const auto& p : comp.provided_ports) {
      if (!names.insert(p.name).second) {
        report.add(id, "duplicate-port", Severity::error,
                   "port name '" + p.name + "' declared twice");
      }
    }
    for (const auto& p : comp.required_ports) {
      if (!names.insert(p.name).second) {
        report.add(id, "duplicate-port", Severity::error,
                   "port name '" + p.name + "' declared twice");
      }
    }
    if (comp.provided_ports.empty() && comp.required_ports.empty()) {
      report.add(id, "orphan-component", Severity::error,
                 "component declares no ports");
    }
    // Diagram convention: a single-output component's port carries the
    // label of the argument it provides.
    if (comp.provided_ports.size() == 1 &&
        comp.provided_ports.front().name != comp.function_label) {
      report.add(id, "port-label-convention", Severity::warning,
                 "single provided port '" + comp.provided_ports.front().name +
                     "' differs from function label '" + comp.function_label +
                     "'");
    }
  }

  auto check_endpoint = [&](const std::string& link_id, const PortRef& ref,
                            bool provided) {
    const Component* comp = hcd.find_component(ref.component);
    if (!comp) {
      report.add(link_id, "dangling-port", Severity::error,
                 "component '" + ref.component + "' does not exist");
      return;
    }
    const PortSpec* port = provided ? comp->find_provided(ref.port)
                                    : comp->find_required(ref.port);
    if (!port) {
      report.add(link_id, "dangling-port", Severity::error,
                 std::string(provided ? "provided" : "required") + " port '" +
                     ref.port + "' not declared on '" + ref.component + "'");
    }
  };
  for (const auto& [id, link] : hcd.links) {
    check_endpoint(id, link.from, /*provided=*/true);
    check_endpoint(id, link.to, /*provided=*/false);
  }

  auto check_external = [&](const ExternalPort& ext, bool provided,
                            const char* what) {
    const Component* comp = hcd.find_component(ext.component);
    if (!comp) {
      report.add(ext.name, "dangling-external", Severity::error,
                 std::string(what) + " '" + ext.name +
                     "' targets missing component '" + ext.component + "'");
      return;
    }
    const PortSpec* port = provided ? comp->find_provided(ext.port)
                                    : comp->find_required(ext.port);
    if (!port) {
      report.add(ext.name, "dangling-external", Severity::error,
                 std::string(what) + " '" + ext.name + "' targets undeclared " +
                     (provided ? "provided" : "required") + " port '" +
                     ext.port + "'");
    }
  };
  for (const auto& ext : hcd.external_inputs) {
    check_external(ext, /*provided=*/false, "external input");
  }
  for (const auto& ext : hcd.external_outputs) {
    check_external(ext, /*provided=*/true, "external output");
  }

  if (!hcd.fragment) {
    for (const auto& in : hcd.external_inputs) {
      if (!hcd.find_component(in.component)) continue;
      const bool reaches_any = std::any_of(
          hcd.external_outputs.begin(), hcd.external_outputs.end(),
          [&](const ExternalPort& out) {
            return hcd.find_component(out.component) &&
                   component_reaches(hcd, in.component, out.component);
          });
      if (!reaches_any) {
        report.add(in.name, "unreachable-external", Severity::error,
                   "external input '" + in.name +
                       "' reaches no external output");
      }
    }
  }

  return report;
}

DependencyGraph dependency_graph(const Hcd& hcd) {
  if (validate_hcd(hcd).has_errors()) {
    throw BraError("dependency_graph requires a well-formed HCD");
  }
  DependencyGraph graph;
  for (const auto& [id, comp] : hcd.components) graph.nodes.push_back(id);
  for (const auto& [id, link] : hcd.links) {
    graph.edges.push_back({link.from.component, link.to.component, id});
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  return graph;
}

bool component_reaches(const Hcd& hcd, const std::string& from,
                       const std::string& to) {
  if (from == to) return true;
  std::set<std::string> seen{from};
  std::deque<std::string> frontier{from};
  while (!frontier.empty()) {
    const std::string current = frontier.front();
    frontier.pop_front();
    for (const auto& [id, link] : hcd.links) {
      if (link.from.component != current) continue;
      if (link.to.component == to) return true;
      if (seen.insert(link.to.component).second) {
        frontier.push_back(link.to.component);
      }
    }
  }
  return false;
}

}  // namespace bra

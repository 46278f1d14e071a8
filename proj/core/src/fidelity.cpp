#include "bra/fidelity.hpp"

#include <algorithm>
#include <set>

namespace bra {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

}  // namespace

StructuralScores structural_similarity(const ImplGraph& impl, const Bif& bif,
                                       const std::set<std::string>& roi) {
  if (roi.empty()) throw BraError("ROI must not be empty");
  const RoiExtract extract = roi_extract(bif, roi);
  const Bif& sub = extract.sub;

  std::set<std::string> roi_uniform;
  for (const auto& [id, node] : sub.circuits) {
    if (node.is_uniform) roi_uniform.insert(id);
  }

  // Image of an impl node: the uniform leaves of its mapped circuit.
  auto image = [&](const std::string& node) -> std::vector<std::string> {
    auto it = impl.mapping.find(node);
    if (it == impl.mapping.end()) return {};
    if (!sub.find_circuit(it->second)) return {};
    return uniform_leaves(sub, it->second);
  };

  std::size_t valid_nodes = 0;
  std::set<std::string> covered_circuits;
  for (const auto& node : impl.nodes) {
    const auto leaves = image(node);
    if (leaves.empty()) continue;
    ++valid_nodes;
    covered_circuits.insert(leaves.begin(), leaves.end());
  }

  // An impl edge is correct when some ROI connection joins the endpoint
  // images in the same direction.
  auto edge_connection = [&](const std::string& a,
                             const std::string& b) -> const Connection* {
    const auto from = image(a);
    const auto to = image(b);
    if (from.empty() || to.empty()) return nullptr;
    for (const auto& [cid, conn] : sub.connections) {
      if (!std::binary_search(from.begin(), from.end(), conn.input)) continue;
      const auto dst = uniform_leaves(sub, conn.output);
      if (std::any_of(to.begin(), to.end(), [&](const std::string& leaf) {
            return std::binary_search(dst.begin(), dst.end(), leaf);
          })) {
        return &conn;
      }
    }
    return nullptr;
  };

  std::size_t correct_edges = 0;
  std::set<std::string> covered_connections;
  for (const auto& [a, b] : impl.edges) {
    if (const Connection* conn = edge_connection(a, b)) {
      ++correct_edges;
      covered_connections.insert(conn->id);
    }
  }
  // Recall scans every ROI connection against every impl edge.
  std::size_t recalled_connections = 0;
  for (const auto& [cid, conn] : sub.connections) {
    const auto dst = uniform_leaves(sub, conn.output);
    const bool covered = std::any_of(
        impl.edges.begin(), impl.edges.end(), [&](const auto& edge) {
          const auto from = image(edge.first);
          const auto to = image(edge.second);
          return std::binary_search(from.begin(), from.end(), conn.input) &&
                 std::any_of(to.begin(), to.end(), [&](const std::string& l) {
                   return std::binary_search(dst.begin(), dst.end(), l);
                 });
        });
    if (covered) ++recalled_connections;
  }

  StructuralScores scores;
  scores.node_precision = ratio(valid_nodes, impl.nodes.size());
  scores.node_recall = ratio(covered_circuits.size(), roi_uniform.size());
  scores.edge_precision = ratio(correct_edges, impl.edges.size());
  scores.edge_recall = ratio(recalled_connections, sub.connections.size());
  scores.f1_node = f1(scores.node_precision, scores.node_recall);
  scores.f1_edge = f1(scores.edge_precision, scores.edge_recall);
  scores.combined = (scores.f1_node + scores.f1_edge) / 2.0;
  return scores;
}

double functional_similarity(const Trace& trace, const Hcd& hcd,
                             const std::vector<BehaviorConstraint>& constraints) {
  if (constraints.empty()) return 1.0;  // vacuous satisfaction

  std::size_t satisfied = 0;
  for (const auto& constraint : constraints) {
    auto it = hcd.links.find(constraint.link_id);
    if (it == hcd.links.end()) {
      throw BraError("constraint references unknown link '" +
                     constraint.link_id + "'");
    }
    const DependencyLink& link = it->second;
    const int source_t = trace.first_active(link.from.component, link.from.port);

    // Target activation: first active step over the target component's
    // provided ports.
    int target_t = -1;
    const Component& target = *hcd.find_component(link.to.component);
    for (const auto& port : target.provided_ports) {
      const int t = trace.first_active(link.to.component, port.name);
      if (t >= 0 && (target_t < 0 || t < target_t)) target_t = t;
    }

    bool ok = false;
    switch (constraint.kind) {
      case BehaviorConstraint::Kind::before:
        ok = source_t >= 0 && target_t >= 0 && source_t < target_t;
        break;
      case BehaviorConstraint::Kind::within:
        ok = source_t >= 0 && target_t >= source_t &&
             target_t - source_t <= constraint.k;
        break;
    }
    if (ok) ++satisfied;
  }
  return static_cast<double>(satisfied) / static_cast<double>(constraints.size());
}

ActivityResult activity_reproducibility(const Trace& trace,
                                        const Trace& reference,
                                        const std::vector<PairingEntry>& pairing,
                                        double threshold) {
  if (pairing.empty()) throw BraError("pairing must not be empty");
  const int steps = std::min(trace.steps, reference.steps);

  auto active_steps = [&](const Trace& t, const std::string& component,
                          const std::string& port) {
    std::set<int> active;
    bool found = false;
    for (const auto& r : t.records) {
      if (r.component != component || r.port != port) continue;
      found = true;
      if (r.t < steps && r.value >= threshold) active.insert(r.t);
    }
    if (!found) {
      throw BraError("trace has no channel ('" + component + "', '" + port +
                     "')");
    }
    return active;
  };

  ActivityResult result;
  double total = 0.0;
  for (const auto& pair : pairing) {
    const std::set<int> a = active_steps(trace, pair.component, pair.port);
    const std::set<int> b =
        active_steps(reference, pair.ref_component, pair.ref_port);
    std::set<int> union_set = a;
    union_set.insert(b.begin(), b.end());
    double jaccard = 1.0;  // empty vs empty
    if (!union_set.empty()) {
      std::size_t intersection = 0;
      for (int t : a) {
        if (b.contains(t)) ++intersection;
      }
      jaccard = static_cast<double>(intersection) /
                static_cast<double>(union_set.size());
    }
    result.per_pair.push_back(jaccard);
    total += jaccard;
  }
  result.mean = total / static_cast<double>(pairing.size());
  return result;
}

PerformanceResult performance_eval(const Hcd& hcd, const StubBindings& bindings,
                                   const std::vector<Task>& suite) {
  if (suite.empty()) throw BraError("task suite must not be empty");

  PerformanceResult result;
  std::size_t passes = 0;
  for (const auto& task : suite) {
    TaskResult tr;
    tr.name = task.name;
    try {
      const Trace trace =
          run(hcd, bindings, task.schedule, task.steps, task.seed);
      tr.passed = goal_achieved(task.goal, trace, task.schedule);
    } catch (const BraError& e) {
      tr.passed = false;
      tr.cause = e.what();
    }
    if (tr.passed) ++passes;
    result.tasks.push_back(std::move(tr));
  }
  result.rate = static_cast<double>(passes) / static_cast<double>(suite.size());
  return result;
}

}  // namespace bra

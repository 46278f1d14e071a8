#include "bra/binding.hpp"

#include <algorithm>

#include "bra/io.hpp"
#include "bra/registry.hpp"

namespace bra {

SignCompatibility::Verdict SignCompatibility::lookup(Sign circuit,
                                                     Sign claim) const {
  auto it = table.find({circuit, claim});
  return it == table.end() ? Verdict::fail : it->second;
}

SignCompatibility SignCompatibility::defaults() {
  SignCompatibility compat;
  const Sign claims[] = {Sign::excitatory, Sign::inhibitory, Sign::modulatory};
  const Sign circuits[] = {Sign::unknown, Sign::excitatory, Sign::inhibitory,
                           Sign::modulatory};
  for (Sign circuit : circuits) {
    for (Sign claim : claims) {
      Verdict verdict = Verdict::fail;
      if (circuit == Sign::unknown) {
        verdict = Verdict::warn;
      } else if (circuit == claim) {
        verdict = Verdict::ok;
      }
      compat.table[{circuit, claim}] = verdict;
    }
  }
  return compat;
}

namespace {

const CircuitNode& resolve_circuit(const Bif& bif, const std::string& id,
                                   const std::string& context) {
  const CircuitNode* node = bif.find_circuit(id);
  if (!node) throw BraError(context + ": unknown circuit '" + id + "'");
  return *node;
}

}  // namespace

ValidationReport check_structural_consistency(const Bif& bif, const Hcd& hcd,
                                              const BraMapping& mapping) {
  ValidationReport report;

  // Injectivity on uniform-circuit targets.
  std::map<std::string, std::string> claimed;  // circuit -> component
  for (const auto& [comp_id, circuit_id] : mapping.component_map) {
    if (!hcd.find_component(comp_id)) {
      throw BraError("mapping references unknown component '" + comp_id + "'");
    }
    const CircuitNode& node =
        resolve_circuit(bif, circuit_id, "component '" + comp_id + "'");
    if (node.is_uniform) {
      auto [it, inserted] = claimed.emplace(circuit_id, comp_id);
      if (!inserted) {
        report.add(comp_id, "non-injective-mapping", Severity::error,
                   "uniform circuit '" + circuit_id + "' already claimed by '" +
                       it->second + "'");
      }
    }
  }

  for (const auto& [link_id, link] : hcd.links) {
    auto mapped = mapping.link_map.find(link_id);
    if (mapped == mapping.link_map.end()) {
      report.add(link_id, "unmapped-link", Severity::error,
                 "dependency link has no mapped connection");
      continue;
    }
    const Connection* conn = bif.find_connection(mapped->second);
    if (!conn) {
      throw BraError("link '" + link_id + "' maps to unknown connection '" +
                     mapped->second + "'");
    }
    auto src_it = mapping.component_map.find(link.from.component);
    auto dst_it = mapping.component_map.find(link.to.component);
    if (src_it == mapping.component_map.end() ||
        dst_it == mapping.component_map.end()) {
      report.add(link_id, "unmapped-component", Severity::error,
                 "an endpoint component of the link is not mapped");
      continue;
    }

    const std::vector<std::string> src_leaves =
        uniform_leaves(bif, src_it->second);
    const std::vector<std::string> dst_leaves =
        uniform_leaves(bif, dst_it->second);
    const std::vector<std::string> conn_dst_leaves =
        uniform_leaves(bif, conn->output);

    const auto contains = [](const std::vector<std::string>& v,
                             const std::string& x) {
      return std::binary_search(v.begin(), v.end(), x);
    };
    const auto intersects = [](const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
      return std::any_of(a.begin(), a.end(), [&](const std::string& x) {
        return std::binary_search(b.begin(), b.end(), x);
      });
    };

    const bool origin_ok = contains(src_leaves, conn->input);
    const bool target_ok = intersects(conn_dst_leaves, dst_leaves);
    if (origin_ok && target_ok) continue;

    // Flag an exact reversal distinctly; it is the common authoring slip.
    const bool reversed = contains(dst_leaves, conn->input) &&
                          intersects(conn_dst_leaves, src_leaves);
    if (reversed) {
      report.add(link_id, "direction-mismatch", Severity::error,
                 "connection '" + conn->id +
                     "' realizes the link in the opposite direction");
    } else if (!origin_ok) {
      report.add(link_id, "origin-mismatch", Severity::error,
                 "connection origin '" + conn->input +
                     "' lies outside the source component's circuit '" +
                     src_it->second + "'");
    } else {
      report.add(link_id, "target-mismatch", Severity::error,
                 "connection destination '" + conn->output +
                     "' does not intersect the target component's circuit '" +
                     dst_it->second + "'");
    }
  }

  return report;
}

ValidationReport check_behavior_consistency(const Bif& bif, const Hcd& hcd,
                                            const BraMapping& mapping,
                                            const SignCompatibility& compat) {
  ValidationReport report;

  for (const auto& [comp_id, comp] : hcd.components) {
    auto mapped = mapping.component_map.find(comp_id);
    for (std::size_t i = 0; i < comp.behavior_claims.size(); ++i) {
      const BehaviorClaim& claim = comp.behavior_claims[i];
      const std::string key = comp_id + ":" + std::to_string(i);

      auto evidence = mapping.evidence.find(key);
      if (evidence == mapping.evidence.end() || evidence->second.empty()) {
        report.add(comp_id, "unsupported-claim", Severity::warning,
                   "claim '" + claim.claim + "' carries no evidence record");
      }

      if (!claim.sign) continue;
      if (mapped == mapping.component_map.end()) {
        report.add(comp_id, "unmapped-component", Severity::error,
                   "signed claim on a component with no mapped circuit");
        continue;
      }
      const CircuitNode& node =
          resolve_circuit(bif, mapped->second, "component '" + comp_id + "'");
      // Composite targets carry no sign of their own.
      const Sign circuit_sign = node.is_uniform ? node.sign : Sign::unknown;
      switch (compat.lookup(circuit_sign, *claim.sign)) {
        case SignCompatibility::Verdict::ok:
          break;
        case SignCompatibility::Verdict::warn:
          report.add(comp_id, "sign-unverifiable", Severity::warning,
                     "circuit '" + mapped->second +
                         "' has unknown sign; claim requires " +
                         std::string(to_string(*claim.sign)));
          break;
        case SignCompatibility::Verdict::fail:
          report.add(comp_id, "sign-incompatible", Severity::error,
                     std::string(to_string(circuit_sign)) + " circuit '" +
                         mapped->second + "' cannot host a " +
                         std::string(to_string(*claim.sign)) + " claim");
          break;
      }
    }
  }

  return report;
}

ValidationReport check_process_consistency(
    const Hcd& hcd, const Trace& trace,
    const std::vector<Milestone>& milestones) {
  // Traces loaded from CSV carry no hcd id; only a conflicting id is fatal.
  if (!trace.hcd_id.empty() && trace.hcd_id != hcd.id) {
    throw BraError("trace was produced for hcd '" + trace.hcd_id +
                   "', not '" + hcd.id + "'");
  }

  ValidationReport report;
  int previous = -1;
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    const Milestone& m = milestones[i];
    int t = -1;
    // First nonzero step of the named port.
    for (const auto& r : trace.records) {
      if (r.component == m.component && r.port == m.event && r.value != 0.0) {
        t = r.t;
        break;
      }
    }
    if (t < 0) {
      report.add(m.component, "milestone-not-observed", Severity::error,
                 "milestone " + std::to_string(i) + " ('" + m.event +
                     "') never fires in the trace");
      return report;
    }
    if (t < previous) {
      report.add(m.component, "milestone-order", Severity::error,
                 "milestone " + std::to_string(i) + " fires at step " +
                     std::to_string(t) + ", before its predecessor at step " +
                     std::to_string(previous));
      return report;
    }
    previous = t;
  }
  return report;
}

std::string_view to_string(FunctionalityStatus s) {
  switch (s) {
    case FunctionalityStatus::achieved:
      return "achieved";
    case FunctionalityStatus::not_achieved:
      return "not-achieved";
    case FunctionalityStatus::not_executable:
      return "not-executable";
  }
  return "not-executable";
}

FunctionalityVerdict check_functionality(const Bif& bif, const Hcd& hcd,
                                         const BraMapping& mapping,
                                         const HarnessConfig& config) {
  (void)bif;
  (void)mapping;
  FunctionalityVerdict verdict;

  for (const auto& [id, comp] : hcd.components) {
    if (!comp.stub_ref && !config.bindings.contains(id)) {
      verdict.status = FunctionalityStatus::not_executable;
      verdict.cause = "component '" + id + "' has no stub";
      return verdict;
    }
  }
  if (hcd.tlf.predicate.kind == GoalPredicate::Kind::none) {
    verdict.status = FunctionalityStatus::not_executable;
    verdict.cause = "tlf carries no goal predicate";
    return verdict;
  }

  try {
    Trace trace =
        run(hcd, config.bindings, config.schedule, config.steps, config.seed);
    const bool achieved =
        goal_achieved(hcd.tlf.predicate, trace, config.schedule);
    verdict.status = achieved ? FunctionalityStatus::achieved
                              : FunctionalityStatus::not_achieved;
    verdict.trace = std::move(trace);
  } catch (const BraError& e) {
    verdict.status = FunctionalityStatus::not_executable;
    verdict.cause = e.what();
  }
  return verdict;
}

AdequacyReport evaluate_adequacy(const Bif& bif, const Hcd& hcd,
                                 const BraMapping& mapping,
                                 const Registry* store, const Trace* trace,
                                 const std::vector<Milestone>& milestones,
                                 const Schedule* schedule) {
  AdequacyReport report;

  auto absorb = [&](const ValidationReport& sub, const std::string& prefix) {
    for (Finding f : sub.findings) {
      f.rule = prefix + ":" + f.rule;
      report.findings.findings.push_back(std::move(f));
    }
  };

  absorb(validate_bif(bif), "bif");
  absorb(validate_hcd(hcd), "hcd");
  absorb(check_structural_consistency(bif, hcd, mapping), "structure");
  absorb(check_behavior_consistency(bif, hcd, mapping), "behavior");

  // Authenticity: every BIF element needs at least one reference.
  for (const auto& [id, node] : bif.circuits) {
    if (node.references.empty()) {
      report.findings.add(id, "authenticity", Severity::error,
                          "circuit '" + id + "' cites no reference");
    }
  }
  for (const auto& [id, conn] : bif.connections) {
    if (conn.references.empty()) {
      report.findings.add(id, "authenticity", Severity::error,
                          "connection '" + id + "' cites no reference");
    }
  }

  if (store) {
    const auto duplicates =
        store->novelty_check(DocKind::bif, nlohmann::json::parse(serialize_bif(bif)));
    for (const auto& dup : duplicates) {
      report.findings.add(dup.content_key, "novelty-duplicate",
                          Severity::warning,
                          "element already registered as " + dup.existing_ref);
    }
  }

  if (trace) {
    absorb(check_process_consistency(hcd, *trace, milestones), "process");
    if (hcd.tlf.predicate.kind != GoalPredicate::Kind::none) {
      // Input-relative goals need the schedule the trace was run with.
      try {
        const bool achieved = goal_achieved(hcd.tlf.predicate, *trace,
                                            schedule ? *schedule : Schedule{});
        report.functionality = achieved ? FunctionalityStatus::achieved
                                        : FunctionalityStatus::not_achieved;
        if (!achieved) {
          report.findings.add(hcd.id, "functionality", Severity::error,
                              "goal predicate '" + hcd.tlf.predicate.id +
                                  "' does not hold on the trace");
        }
      } catch (const BraError& e) {
        report.functionality = FunctionalityStatus::not_executable;
        report.findings.add(hcd.id, "functionality-not-evaluated",
                            Severity::warning, e.what());
      }
    } else {
      report.findings.add(hcd.id, "functionality-not-evaluated",
                          Severity::warning, "tlf carries no goal predicate");
    }
  } else {
    report.findings.add(hcd.id, "functionality-not-evaluated",
                        Severity::warning, "no trace supplied");
  }

  report.certifiable = !report.findings.has_errors();
  return report;
}

}  // namespace bra

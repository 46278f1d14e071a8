#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bra/bif.hpp"
#include "bra/binding.hpp"
#include "bra/fidelity.hpp"
#include "bra/harness.hpp"
#include "bra/hcd.hpp"
#include "bra/merge.hpp"
#include "bra/scid.hpp"

namespace bra {

inline constexpr const char* kFormatVersion = "1";

// Every parse failure carries a location: line/column for syntax errors,
// a JSON-pointer-style path for schema violations.
struct ParseError : BraError {
  ParseError(std::string location_, std::string detail_)
      : BraError(location_.empty() ? detail_ : location_ + ": " + detail_),
        location(std::move(location_)),
        detail(std::move(detail_)) {}

  std::string location;
  std::string detail;
};

// --- canonical JSON documents -------------------------------------------
// Canonical form: sorted object keys, elements sorted by id, two-space
// indent, LF endings, UTF-8. serialize(parse(x)) is byte-identical for
// canonical inputs; unknown fields are rejected.

Bif parse_bif(const std::string& text);
std::string serialize_bif(const Bif& bif);

Hcd parse_hcd(const std::string& text);
std::string serialize_hcd(const Hcd& hcd);

BraMapping parse_mapping(const std::string& text);
std::string serialize_mapping(const BraMapping& mapping);

FunctionTemplate parse_template(const std::string& text);
std::string serialize_template(const FunctionTemplate& tmpl);

std::vector<RejectionRule> parse_rules(const std::string& text);
std::string serialize_rules(const std::vector<RejectionRule>& rules);

StubBindings parse_stubs(const std::string& text);
std::string serialize_stubs(const StubBindings& bindings);

ImplGraph parse_impl(const std::string& text);
std::string serialize_impl(const ImplGraph& impl);

std::vector<BehaviorConstraint> parse_constraints(const std::string& text);
std::vector<PairingEntry> parse_pairing(const std::string& text);
std::vector<Task> parse_tasks(const std::string& text);
std::vector<SoftConstraint> parse_soft_constraints(const std::string& text);
std::vector<Milestone> parse_milestones(const std::string& text);

struct CandidateSet {
  std::string template_id;
  bool truncated = false;
  std::vector<CandidateHcd> candidates;
};

CandidateSet parse_candidates(const std::string& text);
std::string serialize_candidates(const CandidateSet& set);

// --- CSV -----------------------------------------------------------------

/// Header "t,input,value". The grid must be complete for each named
/// input over the covered steps.
Schedule parse_schedule_csv(const std::string& text);
std::string serialize_schedule_csv(const Schedule& schedule, int steps);

/// Header "t,component,port,value", rows sorted by (t, component, port),
/// values rendered with 9 significant digits.
std::string serialize_trace_csv(const Trace& trace);
Trace parse_trace_csv(const std::string& text);

// --- TSV ingestion (spreadsheet path, import only) ----------------------

struct TsvImport {
  Bif bif;
  std::vector<std::string> log;  // one line per defaulted cell
};

/// Circuits columns: id, kind, label, species, transmitter, sign,
/// cell_count, neocortical, members, references. Connections columns:
/// id, input, output, species, size, transmitter, hierarchy, references.
/// Empty cells become explicit unknowns and are logged.
TsvImport import_bif_tsv(const std::string& circuits_tsv,
                         const std::string& connections_tsv);

// --- DOT export ----------------------------------------------------------

/// Deterministic node/edge order; uniform circuits annotated with sign
/// and transmitter. With a mapping, each mapped circuit/component pair
/// shares a cluster.
std::string export_dot_bif(const Bif& bif, const BraMapping* mapping = nullptr);
std::string export_dot_hcd(const Hcd& hcd, const BraMapping* mapping = nullptr);

// --- report serialization ------------------------------------------------

nlohmann::json report_to_json(const ValidationReport& report);
nlohmann::json adequacy_to_json(const AdequacyReport& report);
nlohmann::json structural_scores_to_json(const StructuralScores& scores);
nlohmann::json activity_to_json(const ActivityResult& result);
nlohmann::json performance_to_json(const PerformanceResult& result);
nlohmann::json merge_plan_to_json(const MergePlan& plan);
nlohmann::json feasibility_to_json(const FeasibilityVerdict& verdict);

/// Canonical rendering used for every emitted JSON document.
std::string dump_canonical(const nlohmann::json& j);

// --- files ---------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace bra

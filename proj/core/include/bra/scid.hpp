#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bra/bif.hpp"
#include "bra/binding.hpp"
#include "bra/hcd.hpp"

namespace bra {

// Empty sets mean "unconstrained". An absent cell_count fails a
// min_cell_count constraint (unknown is not the same as satisfying).
struct NodeConstraint {
  std::set<Sign> allowed_signs;
  std::set<Transmitter> allowed_transmitters;
  std::optional<std::uint64_t> min_cell_count;

  bool operator==(const NodeConstraint&) const = default;
};

struct Role {
  std::string id;
  std::string function_label;
  NodeConstraint constraint;

  bool operator==(const Role&) const = default;
};

// required_sign applies to the sign of the origin uniform circuit of
// every connection on the realized path (strict: unknown does not match).
struct EdgeConstraint {
  std::optional<Sign> required_sign;
  int max_path_len = 1;
  std::string signal_semantics;

  bool operator==(const EdgeConstraint&) const = default;
};

struct RoleEdge {
  std::string from;
  std::string to;
  EdgeConstraint constraint;

  bool operator==(const RoleEdge&) const = default;
};

enum class ExternalDirection { afferent, efferent };

struct ExternalBinding {
  std::string role;
  ExternalDirection direction = ExternalDirection::afferent;
  std::string name;

  bool operator==(const ExternalBinding&) const = default;
};

struct FunctionTemplate {
  std::string id;
  std::string tlf_goal;
  std::vector<Role> roles;
  std::vector<RoleEdge> role_edges;
  std::vector<ExternalBinding> externals;

  [[nodiscard]] const Role* find_role(const std::string& id) const;

  bool operator==(const FunctionTemplate&) const = default;
};

/// Role-id uniqueness, edge endpoint resolution, max_path_len >= 1.
ValidationReport validate_template(const FunctionTemplate& tmpl);

struct RejectionPredicate {
  enum class Kind {
    role_attribute,  // attribute of the role's circuit is in `values`
    co_location,     // both roles' circuits are leaves of `circuit`
    path_exists,     // a connection path <= max_len joins the two roles
  };

  Kind kind = Kind::role_attribute;
  bool negate = false;

  // role_attribute
  std::string role;
  std::string attribute;  // "sign" | "transmitter" | "species"
  std::set<std::string> values;

  // co_location / path_exists
  std::string role_a;
  std::string role_b;
  std::string circuit;
  int max_len = 1;

  bool operator==(const RejectionPredicate&) const = default;
};

enum class FindingField {
  neuroscience,
  cognitive_psychology,
  evolution,
  development,
  other,
};

std::string_view to_string(FindingField f);
FindingField finding_field_from_string(std::string_view text);

struct RejectionRule {
  std::string id;
  std::string description;
  FindingField field = FindingField::other;
  RejectionPredicate predicate;
  Citation citation;

  bool operator==(const RejectionRule&) const = default;
};

struct CandidateHcd {
  enum class Status { surviving, rejected };

  std::map<std::string, std::string> assignment;  // role -> uniform circuit
  // Realized path per role edge, keyed by edge index in the template;
  // a path is a sequence of connection ids.
  std::map<std::size_t, std::vector<std::string>> realized_edges;
  Status status = Status::surviving;
  std::string rejected_by;  // first matching rule id
  double score = 0.0;

  bool operator==(const CandidateHcd&) const = default;
};

struct FeasibilityVerdict {
  bool feasible = true;
  std::vector<std::string> unbindable;  // external binding names
};

/// Step 1-B: every template external must be attachable to at least one
/// boundary connection of the ROI. Throws on an empty ROI.
FeasibilityVerdict check_io_feasibility(const Bif& bif,
                                        const std::set<std::string>& roi,
                                        const FunctionTemplate& tmpl);

struct EnumerationOptions {
  std::optional<std::size_t> limit;
  int max_path_len_cap = 0;  // 0 = use template values unclamped
  bool injective = true;     // relaxing this is a recorded deviation
  int jobs = 1;
  std::size_t leaf_bound = 64;
};

struct EnumerationResult {
  std::vector<CandidateHcd> candidates;
  bool truncated = false;
};

/// Step 2: every injective constraint-satisfying role->uniform-circuit
/// assignment whose role edges are realized by in-ROI connection paths.
/// Deterministic lexicographic order by (role order, circuit id),
/// independent of `jobs`. Throws when the ROI leaf count exceeds
/// `leaf_bound`.
EnumerationResult enumerate_candidates(const Bif& bif,
                                       const std::set<std::string>& roi,
                                       const FunctionTemplate& tmpl,
                                       const EnumerationOptions& opts = {});

/// Step 3: marks each candidate rejected by the first matching rule (in
/// list order) or surviving. Rejections are recorded, never deleted.
/// Throws BraError naming the rule on a malformed predicate.
std::vector<CandidateHcd> apply_rejection_rules(
    const Bif& bif, const std::set<std::string>& roi,
    std::vector<CandidateHcd> candidates,
    const std::vector<RejectionRule>& rules);

struct SoftConstraint {
  std::string id;
  double weight = 0.0;
  RejectionPredicate predicate;  // same declarative forms

  bool operator==(const SoftConstraint&) const = default;
};

/// Score = sum of satisfied soft-constraint weights; descending order,
/// ties broken by lexicographic assignment.
std::vector<CandidateHcd> rank_candidates(
    const Bif& bif, const std::set<std::string>& roi,
    std::vector<CandidateHcd> surviving,
    const std::vector<SoftConstraint>& soft_constraints);

/// Emits one component per role plus "relay:<connection id>" components
/// for multi-hop paths, with the matching BraMapping. Throws on a
/// rejected candidate.
std::pair<Hcd, BraMapping> materialize_hcd(const Bif& bif,
                                           const CandidateHcd& candidate,
                                           const FunctionTemplate& tmpl,
                                           const std::string& bif_id = "",
                                           const std::set<std::string>& roi = {});

}  // namespace bra

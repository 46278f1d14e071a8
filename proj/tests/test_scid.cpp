#include <doctest.h>

#include <random>

#include "bra/io.hpp"
#include "bra/scid.hpp"

using namespace bra;

namespace {

std::string fixture(const std::string& rel) {
  return read_file(std::string(FIXTURES_DIR) + "/" + rel);
}

CircuitNode uniform(const std::string& id, Sign sign, Transmitter tx) {
  CircuitNode n;
  n.id = id;
  n.label = id;
  n.is_uniform = true;
  n.sign = sign;
  n.transmitter = tx;
  return n;
}

Connection conn(const std::string& id, const std::string& in,
                const std::string& out) {
  Connection c;
  c.id = id;
  c.input = in;
  c.output = out;
  return c;
}

std::set<std::string> all_circuits(const Bif& bif) {
  std::set<std::string> roi;
  for (const auto& [id, node] : bif.circuits) roi.insert(id);
  return roi;
}

// --- independent reference implementation --------------------------------
// Exhaustive search over simple connection paths and injective
// assignments, written without BFS or pruning so it shares no structure
// with the library.

struct OracleHop {
  std::string to;
  std::string conn_id;
  Sign origin_sign;
};

using OracleAdj = std::map<std::string, std::vector<OracleHop>>;

OracleAdj oracle_adjacency(const Bif& bif) {
  OracleAdj adj;
  for (const auto& [cid, c] : bif.connections) {
    for (const auto& leaf : uniform_leaves(bif, c.output)) {
      adj[c.input].push_back({leaf, cid, bif.circuits.at(c.input).sign});
    }
  }
  return adj;
}

void oracle_paths(const OracleAdj& adj, const std::string& at,
                  const std::string& to, int budget,
                  const std::optional<Sign>& required_sign,
                  std::set<std::string>& seen, std::vector<std::string>& path,
                  std::vector<std::vector<std::string>>& out) {
  if (!path.empty() && at == to) {
    out.push_back(path);
    return;
  }
  if (budget == 0) return;
  auto it = adj.find(at);
  if (it == adj.end()) return;
  for (const auto& hop : it->second) {
    if (required_sign && hop.origin_sign != *required_sign) continue;
    if (hop.to != to && seen.contains(hop.to)) continue;
    seen.insert(hop.to);
    path.push_back(hop.conn_id);
    oracle_paths(adj, hop.to, to, budget - 1, required_sign, seen, path, out);
    path.pop_back();
    seen.erase(hop.to);
  }
}

std::optional<std::vector<std::string>> oracle_best_path(
    const OracleAdj& adj, const std::string& from, const std::string& to,
    int max_len, const std::optional<Sign>& required_sign) {
  std::set<std::string> seen{from};
  std::vector<std::string> path;
  std::vector<std::vector<std::string>> out;
  oracle_paths(adj, from, to, max_len, required_sign, seen, path, out);
  if (out.empty()) return std::nullopt;
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) {
              return std::make_pair(a.size(), a) < std::make_pair(b.size(), b);
            });
  return out.front();
}

bool oracle_node_ok(const NodeConstraint& c, const CircuitNode& node) {
  if (!c.allowed_signs.empty() && !c.allowed_signs.contains(node.sign)) {
    return false;
  }
  if (!c.allowed_transmitters.empty() &&
      !c.allowed_transmitters.contains(node.transmitter)) {
    return false;
  }
  if (c.min_cell_count &&
      (!node.cell_count || *node.cell_count < *c.min_cell_count)) {
    return false;
  }
  return true;
}

std::vector<CandidateHcd> oracle_enumerate(const Bif& bif,
                                           const FunctionTemplate& tmpl) {
  const OracleAdj adj = oracle_adjacency(bif);
  std::vector<std::string> leaves;
  for (const auto& [id, node] : bif.circuits) {
    if (node.is_uniform) leaves.push_back(id);
  }

  std::vector<CandidateHcd> out;
  std::map<std::string, std::string> assignment;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == tmpl.roles.size()) {
      CandidateHcd cand;
      cand.assignment = assignment;
      for (std::size_t e = 0; e < tmpl.role_edges.size(); ++e) {
        const RoleEdge& edge = tmpl.role_edges[e];
        auto path = oracle_best_path(adj, assignment.at(edge.from),
                                     assignment.at(edge.to),
                                     edge.constraint.max_path_len,
                                     edge.constraint.required_sign);
        if (!path) return;
        cand.realized_edges[e] = std::move(*path);
      }
      out.push_back(std::move(cand));
      return;
    }
    const Role& role = tmpl.roles[i];
    for (const auto& leaf : leaves) {
      bool taken = false;
      for (const auto& [r, c] : assignment) taken = taken || c == leaf;
      if (taken) continue;
      if (!oracle_node_ok(role.constraint, bif.circuits.at(leaf))) continue;
      assignment[role.id] = leaf;
      self(self, i + 1);
      assignment.erase(role.id);
    }
  };
  rec(rec, 0);
  return out;
}

// --- random instances ----------------------------------------------------

Bif random_bif(std::mt19937_64& rng) {
  const Sign signs[] = {Sign::unknown, Sign::excitatory, Sign::inhibitory,
                        Sign::modulatory};
  const Transmitter txs[] = {Transmitter::glutamate, Transmitter::gaba,
                             Transmitter::dopamine};
  Bif bif;
  const int n = 3 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    CircuitNode node = uniform("c" + std::to_string(i), signs[rng() % 4],
                               txs[rng() % 3]);
    if (rng() % 2 == 0) node.cell_count = 10 + rng() % 90;
    bif.circuits.emplace(node.id, node);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || rng() % 100 >= 35) continue;
      const std::string id =
          "k" + std::to_string(i) + "_" + std::to_string(j);
      bif.connections.emplace(
          id, conn(id, "c" + std::to_string(i), "c" + std::to_string(j)));
    }
  }
  return bif;
}

FunctionTemplate random_template(std::mt19937_64& rng) {
  const Sign signs[] = {Sign::excitatory, Sign::inhibitory, Sign::modulatory};
  const Transmitter txs[] = {Transmitter::glutamate, Transmitter::gaba,
                             Transmitter::dopamine};
  FunctionTemplate tmpl;
  tmpl.id = "random";
  const int r = 2 + static_cast<int>(rng() % 2);
  for (int i = 0; i < r; ++i) {
    Role role;
    role.id = "R" + std::to_string(i);
    role.function_label = role.id;
    if (rng() % 2 == 0) role.constraint.allowed_signs = {signs[rng() % 3]};
    if (rng() % 5 < 2) role.constraint.allowed_transmitters = {txs[rng() % 3]};
    if (rng() % 5 == 0) role.constraint.min_cell_count = 50;
    tmpl.roles.push_back(role);
  }
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      if (i == j || rng() % 2 != 0) continue;
      RoleEdge edge;
      edge.from = "R" + std::to_string(i);
      edge.to = "R" + std::to_string(j);
      edge.constraint.max_path_len = 1 + static_cast<int>(rng() % 2);
      if (rng() % 10 < 3) edge.constraint.required_sign = signs[rng() % 3];
      tmpl.role_edges.push_back(edge);
    }
  }
  return tmpl;
}

}  // namespace

TEST_CASE("enumeration matches an exhaustive reference search") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    const Bif bif = random_bif(rng);
    const FunctionTemplate tmpl = random_template(rng);
    const std::set<std::string> roi = all_circuits(bif);

    const auto expected = oracle_enumerate(bif, tmpl);
    const auto got = enumerate_candidates(bif, roi, tmpl);
    CHECK(!got.truncated);
    REQUIRE(got.candidates.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(got.candidates[i].assignment == expected[i].assignment);
      CHECK(got.candidates[i].realized_edges == expected[i].realized_edges);
    }
  }
}

TEST_CASE("the candidate list does not depend on the job count") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    const Bif bif = random_bif(rng);
    const FunctionTemplate tmpl = random_template(rng);
    const std::set<std::string> roi = all_circuits(bif);

    const auto serial = enumerate_candidates(bif, roi, tmpl);
    EnumerationOptions parallel;
    parallel.jobs = 4;
    const auto threaded = enumerate_candidates(bif, roi, tmpl, parallel);
    CHECK(serial.candidates == threaded.candidates);
  }
}

TEST_CASE("limit truncates a stable prefix and the leaf bound guards blowup") {
  Bif bif;
  for (int i = 0; i < 3; ++i) {
    bif.circuits.emplace("c" + std::to_string(i),
                         uniform("c" + std::to_string(i), Sign::excitatory,
                                 Transmitter::glutamate));
  }
  FunctionTemplate tmpl;
  tmpl.id = "one-role";
  tmpl.roles.push_back({"R0", "R0", {}});
  const auto roi = all_circuits(bif);

  const auto full = enumerate_candidates(bif, roi, tmpl);
  CHECK(full.candidates.size() == 3);

  EnumerationOptions limited;
  limited.limit = 2;
  const auto cut = enumerate_candidates(bif, roi, tmpl, limited);
  CHECK(cut.truncated);
  REQUIRE(cut.candidates.size() == 2);
  CHECK(cut.candidates[0] == full.candidates[0]);
  CHECK(cut.candidates[1] == full.candidates[1]);

  EnumerationOptions tight;
  tight.leaf_bound = 2;
  CHECK_THROWS_AS((void)enumerate_candidates(bif, roi, tmpl, tight), BraError);
  CHECK_THROWS_AS((void)enumerate_candidates(bif, {}, tmpl), BraError);
}

TEST_CASE("interface feasibility needs boundary connections per direction") {
  Bif bif;
  bif.circuits.emplace("in", uniform("in", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("out", uniform("out", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("ext", uniform("ext", Sign::excitatory, Transmitter::glutamate));
  bif.connections.emplace("k_in", conn("k_in", "ext", "in"));
  bif.connections.emplace("k_io", conn("k_io", "in", "out"));

  FunctionTemplate tmpl;
  tmpl.roles.push_back({"R0", "R0", {}});
  tmpl.externals.push_back({"sense", ExternalDirection::afferent, "sense"});
  tmpl.externals.push_back({"act", ExternalDirection::efferent, "act"});

  // "in" has an afferent from ext but no efferent out of the ROI.
  const auto verdict = check_io_feasibility(bif, {"in", "out"}, tmpl);
  CHECK(!verdict.feasible);
  CHECK(verdict.unbindable == std::vector<std::string>{"act"});

  bif.connections.emplace("k_out", conn("k_out", "out", "ext"));
  CHECK(check_io_feasibility(bif, {"in", "out"}, tmpl).feasible);
  CHECK_THROWS_AS((void)check_io_feasibility(bif, {}, tmpl), BraError);
}

TEST_CASE("rejection marks the first matching rule and keeps the record") {
  Bif bif;
  bif.circuits.emplace("c0", uniform("c0", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("c1", uniform("c1", Sign::inhibitory, Transmitter::gaba));
  FunctionTemplate tmpl;
  tmpl.roles.push_back({"R0", "R0", {}});
  const auto roi = all_circuits(bif);
  auto candidates = enumerate_candidates(bif, roi, tmpl).candidates;
  REQUIRE(candidates.size() == 2);  // c0 and c1

  RejectionRule first;
  first.id = "no-excitatory";
  first.predicate.kind = RejectionPredicate::Kind::role_attribute;
  first.predicate.role = "R0";
  first.predicate.attribute = "sign";
  first.predicate.values = {"excitatory"};
  RejectionRule second = first;
  second.id = "no-glutamate";
  second.predicate.attribute = "transmitter";
  second.predicate.values = {"glutamate"};

  auto judged = apply_rejection_rules(bif, roi, candidates, {first, second});
  REQUIRE(judged.size() == 2);
  CHECK(judged[0].status == CandidateHcd::Status::rejected);
  CHECK(judged[0].rejected_by == "no-excitatory");  // first match wins
  CHECK(judged[1].status == CandidateHcd::Status::surviving);

  RejectionRule inverted = first;
  inverted.id = "keep-excitatory";
  inverted.predicate.negate = true;
  judged = apply_rejection_rules(bif, roi, candidates, {inverted});
  CHECK(judged[0].status == CandidateHcd::Status::surviving);
  CHECK(judged[1].rejected_by == "keep-excitatory");

  RejectionRule broken = first;
  broken.id = "bad-attribute";
  broken.predicate.attribute = "color";
  CHECK_THROWS_WITH_AS(
      (void)apply_rejection_rules(bif, roi, candidates, {broken}),
      doctest::Contains("bad-attribute"), BraError);
}

TEST_CASE("ranking sums satisfied weights and breaks ties by assignment") {
  Bif bif;
  bif.circuits.emplace("c0", uniform("c0", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("c1", uniform("c1", Sign::excitatory, Transmitter::gaba));
  bif.circuits.emplace("c2", uniform("c2", Sign::inhibitory, Transmitter::gaba));
  FunctionTemplate tmpl;
  tmpl.roles.push_back({"R0", "R0", {}});
  const auto roi = all_circuits(bif);
  auto candidates = enumerate_candidates(bif, roi, tmpl).candidates;
  REQUIRE(candidates.size() == 3);

  SoftConstraint gaba;
  gaba.id = "prefers-gaba";
  gaba.weight = 1.5;
  gaba.predicate.kind = RejectionPredicate::Kind::role_attribute;
  gaba.predicate.role = "R0";
  gaba.predicate.attribute = "transmitter";
  gaba.predicate.values = {"gaba"};
  SoftConstraint inhib = gaba;
  inhib.id = "prefers-inhibitory";
  inhib.weight = 0.5;
  inhib.predicate.attribute = "sign";
  inhib.predicate.values = {"inhibitory"};

  const auto ranked = rank_candidates(bif, roi, candidates, {gaba, inhib});
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].assignment.at("R0") == "c2");  // 2.0
  CHECK(ranked[0].score == 2.0);
  CHECK(ranked[1].assignment.at("R0") == "c1");  // 1.5
  CHECK(ranked[2].assignment.at("R0") == "c0");  // 0.0

  // Equal scores fall back to lexicographic assignment order.
  const auto tied = rank_candidates(bif, roi, candidates, {});
  CHECK(tied[0].assignment.at("R0") == "c0");
  CHECK(tied[1].assignment.at("R0") == "c1");
}

TEST_CASE("materialization spells out roles, relays and the mapping") {
  Bif bif;
  bif.circuits.emplace("u1", uniform("u1", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("u2", uniform("u2", Sign::excitatory, Transmitter::glutamate));
  bif.circuits.emplace("u3", uniform("u3", Sign::excitatory, Transmitter::glutamate));
  bif.connections.emplace("k1", conn("k1", "u1", "u2"));
  bif.connections.emplace("k2", conn("k2", "u2", "u3"));

  FunctionTemplate tmpl;
  tmpl.id = "two-hop";
  tmpl.roles.push_back({"X", "drive", {}});
  tmpl.roles.push_back({"Y", "respond", {}});
  RoleEdge edge;
  edge.from = "X";
  edge.to = "Y";
  edge.constraint.max_path_len = 2;
  edge.constraint.signal_semantics = "push";
  tmpl.role_edges.push_back(edge);

  const auto roi = all_circuits(bif);
  const auto result = enumerate_candidates(bif, roi, tmpl);
  // u1->u2, u2->u3 and the two-hop u1->u3 all satisfy the edge.
  REQUIRE(result.candidates.size() == 3);
  const CandidateHcd* picked = nullptr;
  for (const auto& c : result.candidates) {
    if (c.assignment.at("X") == "u1" && c.assignment.at("Y") == "u3") {
      picked = &c;
    }
  }
  REQUIRE(picked != nullptr);
  const CandidateHcd& cand = *picked;
  CHECK(cand.realized_edges.at(0) == std::vector<std::string>{"k1", "k2"});

  const auto [hcd, mapping] = materialize_hcd(bif, cand, tmpl, "bif-x", roi);
  CHECK(hcd.components.size() == 3);
  REQUIRE(hcd.components.contains("relay:k1"));
  CHECK(mapping.component_map.at("X") == "u1");
  CHECK(mapping.component_map.at("Y") == "u3");
  CHECK(mapping.component_map.at("relay:k1") == "u2");
  CHECK(mapping.bif_id == "bif-x");
  REQUIRE(hcd.links.size() == 2);
  CHECK(mapping.link_map.at("l0") == "k1");
  CHECK(mapping.link_map.at("l1") == "k2");
  CHECK(!validate_hcd(hcd).has_errors());  // fragment, so externals optional

  CandidateHcd rejected = cand;
  rejected.status = CandidateHcd::Status::rejected;
  rejected.rejected_by = "some-rule";
  CHECK_THROWS_AS((void)materialize_hcd(bif, rejected, tmpl), BraError);
}

TEST_CASE("the curated instance survives as the single ranked candidate") {
  const Bif bif = parse_bif(fixture("bg/bif.json"));
  const FunctionTemplate tmpl = parse_template(fixture("bg/template.json"));
  const auto rules = parse_rules(fixture("bg/rules.json"));
  const auto soft = parse_soft_constraints(fixture("bg/soft.json"));
  const std::set<std::string> roi{"bg"};

  CHECK(check_io_feasibility(bif, roi, tmpl).feasible);

  const auto result = enumerate_candidates(bif, roi, tmpl);
  REQUIRE(result.candidates.size() == 1);
  const auto judged = apply_rejection_rules(bif, roi, result.candidates, rules);
  REQUIRE(judged.front().status == CandidateHcd::Status::surviving);
  const auto ranked = rank_candidates(bif, roi, judged, soft);
  const std::map<std::string, std::string> expected{
      {"A", "str_matrix"}, {"B", "str_strio"}, {"C", "gpi"}, {"D", "snc"}};
  CHECK(ranked.front().assignment == expected);
  CHECK(ranked.front().score == 3.0);
}

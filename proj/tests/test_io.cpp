#include <doctest.h>

#include <random>

#include "bra/io.hpp"

using namespace bra;

namespace {

std::string fixture(const std::string& rel) {
  return read_file(std::string(FIXTURES_DIR) + "/" + rel);
}

}  // namespace

TEST_CASE("canonical documents survive a parse/serialize cycle byte for byte") {
  CHECK(serialize_bif(parse_bif(fixture("bg/bif.json"))) ==
        fixture("bg/bif.json"));
  CHECK(serialize_hcd(parse_hcd(fixture("bg/hcd.json"))) ==
        fixture("bg/hcd.json"));
  CHECK(serialize_mapping(parse_mapping(fixture("bg/mapping.json"))) ==
        fixture("bg/mapping.json"));
  CHECK(serialize_template(parse_template(fixture("bg/template.json"))) ==
        fixture("bg/template.json"));
  CHECK(serialize_rules(parse_rules(fixture("bg/rules.json"))) ==
        fixture("bg/rules.json"));
  CHECK(serialize_stubs(parse_stubs(fixture("bg/stubs.json"))) ==
        fixture("bg/stubs.json"));
  CHECK(serialize_impl(parse_impl(fixture("bg/impl.json"))) ==
        fixture("bg/impl.json"));
  CHECK(serialize_hcd(parse_hcd(fixture("pathways/hcd_a.json"))) ==
        fixture("pathways/hcd_a.json"));
  CHECK(serialize_bif(parse_bif(fixture("pathways/bif.json"))) ==
        fixture("pathways/bif.json"));
}

TEST_CASE("value round trips preserve the in-memory structures exactly") {
  const Bif bif = parse_bif(fixture("bg/bif.json"));
  CHECK(parse_bif(serialize_bif(bif)) == bif);
  const Hcd hcd = parse_hcd(fixture("bg/hcd.json"));
  CHECK(parse_hcd(serialize_hcd(hcd)) == hcd);
  const BraMapping mapping = parse_mapping(fixture("bg/mapping.json"));
  CHECK(parse_mapping(serialize_mapping(mapping)) == mapping);
  const FunctionTemplate tmpl = parse_template(fixture("bg/template.json"));
  CHECK(parse_template(serialize_template(tmpl)) == tmpl);
  const auto rules = parse_rules(fixture("bg/rules.json"));
  CHECK(parse_rules(serialize_rules(rules)) == rules);
  const StubBindings stubs = parse_stubs(fixture("bg/stubs.json"));
  CHECK(parse_stubs(serialize_stubs(stubs)) == stubs);
  const ImplGraph impl = parse_impl(fixture("bg/impl.json"));
  CHECK(parse_impl(serialize_impl(impl)) == impl);

  CandidateSet set;
  set.template_id = "actor-critic";
  CandidateHcd cand;
  cand.assignment = {{"A", "str_matrix"}, {"B", "str_strio"}};
  cand.realized_edges = {{0, {"c_matrix_gpi"}}, {2, {"c_snc_matrix"}}};
  cand.score = 3.0;
  set.candidates.push_back(cand);
  cand.status = CandidateHcd::Status::rejected;
  cand.rejected_by = "some-rule";
  set.candidates.push_back(cand);
  const std::string text = serialize_candidates(set);
  const CandidateSet back = parse_candidates(text);
  CHECK(back.template_id == set.template_id);
  CHECK(back.candidates == set.candidates);
  CHECK(serialize_candidates(back) == text);
}

TEST_CASE("unknown fields are rejected with the offending path") {
  nlohmann::json doc = nlohmann::json::parse(fixture("bg/bif.json"));
  doc["circuits"][0]["flavor"] = "sweet";
  try {
    (void)parse_bif(dump_canonical(doc));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.location.find("flavor") != std::string::npos);
    CHECK(e.detail.find("unknown field") != std::string::npos);
  }

  nlohmann::json top = nlohmann::json::parse(fixture("bg/hcd.json"));
  top["extra"] = 1;
  CHECK_THROWS_AS((void)parse_hcd(dump_canonical(top)), ParseError);
}

TEST_CASE("missing fields, wrong types and wrong kinds are schema errors") {
  nlohmann::json doc = nlohmann::json::parse(fixture("bg/bif.json"));
  doc["circuits"][1].erase("id");
  CHECK_THROWS_AS((void)parse_bif(dump_canonical(doc)), ParseError);

  doc = nlohmann::json::parse(fixture("bg/bif.json"));
  doc["circuits"][1]["cell_count"] = "many";
  CHECK_THROWS_AS((void)parse_bif(dump_canonical(doc)), ParseError);

  // A document of the wrong kind is refused up front.
  CHECK_THROWS_WITH_AS((void)parse_hcd(fixture("bg/bif.json")),
                       doctest::Contains("kind"), ParseError);
  doc = nlohmann::json::parse(fixture("bg/bif.json"));
  doc["format_version"] = "99";
  CHECK_THROWS_WITH_AS((void)parse_bif(dump_canonical(doc)),
                       doctest::Contains("format_version"), ParseError);
}

TEST_CASE("syntax errors carry a line and column") {
  const std::string broken = "{\n  \"kind\": \"bif\",\n  oops\n}\n";
  try {
    (void)parse_bif(broken);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.location.find("line 3") != std::string::npos);
    CHECK(e.location.find("column") != std::string::npos);
  }
}

TEST_CASE("schedule CSV wants a complete grid without duplicates") {
  const Schedule schedule = parse_schedule_csv(fixture("bg/schedule.csv"));
  REQUIRE(schedule.contains("reward"));
  REQUIRE(schedule.contains("state"));
  CHECK(schedule.at("reward").size() == 50);
  CHECK(schedule.at("reward")[2] == 1.0);
  CHECK(serialize_schedule_csv(schedule, 50) == fixture("bg/schedule.csv"));

  CHECK_THROWS_AS((void)parse_schedule_csv("nope\n"), ParseError);
  CHECK_THROWS_WITH_AS(
      (void)parse_schedule_csv("t,input,value\n0,a,1\n0,a,2\n"),
      doctest::Contains("duplicate"), ParseError);
  CHECK_THROWS_WITH_AS(
      (void)parse_schedule_csv("t,input,value\n0,a,1\n2,a,0\n"),
      doctest::Contains("gap"), ParseError);
  CHECK_THROWS_AS((void)parse_schedule_csv("t,input,value\n-1,a,1\n"),
                  ParseError);
  CHECK_THROWS_AS((void)parse_schedule_csv("t,input,value\n0,a,much\n"),
                  ParseError);
}

TEST_CASE("trace CSV round trips and re-sorts shuffled rows") {
  Trace trace;
  trace.steps = 2;
  trace.records = {{0, "a", "out", 0.0},
                   {0, "b", "out", 0.125},
                   {1, "a", "out", 0.25},
                   {1, "b", "out", 2.0}};
  const std::string csv = serialize_trace_csv(trace);
  CHECK(csv.starts_with("t,component,port,value\n"));
  const Trace back = parse_trace_csv(csv);
  CHECK(back.records == trace.records);
  CHECK(serialize_trace_csv(back) == csv);

  // Rows in any order load into the same canonical grid.
  const Trace shuffled = parse_trace_csv(
      "t,component,port,value\n1,b,out,2\n0,a,out,0\n1,a,out,0.25\n"
      "0,b,out,0.125\n");
  CHECK(serialize_trace_csv(shuffled) == csv);
}

TEST_CASE("spreadsheet import matches its canonical twin and logs defaults") {
  const TsvImport import =
      import_bif_tsv(fixture("tsv/circuits.tsv"), fixture("tsv/connections.tsv"));
  CHECK(serialize_bif(import.bif) == fixture("tsv/twin.json"));

  // u2 left transmitter blank, the connection left hierarchy blank.
  bool logged_transmitter = false;
  bool logged_hierarchy = false;
  for (const auto& line : import.log) {
    if (line.find("transmitter") != std::string::npos) logged_transmitter = true;
    if (line.find("hierarchy") != std::string::npos) logged_hierarchy = true;
  }
  CHECK(logged_transmitter);
  CHECK(logged_hierarchy);

  // The '!' prefix marks peer-reviewed citations.
  const auto& refs = import.bif.circuits.at("u2").references;
  REQUIRE(refs.size() == 2);
  CHECK(!refs[0].peer_reviewed);
  CHECK(refs[0].text == "Roe 2019");
  CHECK(refs[1].peer_reviewed);

  CHECK_THROWS_AS((void)import_bif_tsv("bogus\n", fixture("tsv/connections.tsv")),
                  ParseError);
  CHECK_THROWS_AS(
      (void)import_bif_tsv(fixture("tsv/circuits.tsv"),
                           "id\tinput\toutput\tspecies\tsize\ttransmitter\t"
                           "hierarchy\treferences\nk9\tu1\tghost\tmouse\t\t\t\t\n"),
      ParseError);
}

TEST_CASE("graph export is deterministic and clusters mapped pairs") {
  const Bif bif = parse_bif(fixture("bg/bif.json"));
  const Hcd hcd = parse_hcd(fixture("bg/hcd.json"));
  const BraMapping mapping = parse_mapping(fixture("bg/mapping.json"));

  const std::string plain = export_dot_bif(bif);
  CHECK(plain == export_dot_bif(bif));
  CHECK(plain.starts_with("digraph bif {"));
  CHECK(plain.find("cluster_") == std::string::npos);

  const std::string mapped = export_dot_bif(bif, &mapping);
  std::size_t clusters = 0;
  for (std::size_t at = mapped.find("subgraph"); at != std::string::npos;
       at = mapped.find("subgraph", at + 1)) {
    ++clusters;
  }
  CHECK(clusters == 4);  // one per mapped pair
  CHECK(mapped.find("component:selector") != std::string::npos);

  const std::string hdot = export_dot_hcd(hcd, &mapping);
  CHECK(hdot == export_dot_hcd(hcd, &mapping));
  CHECK(hdot.find("circuit:snc") != std::string::npos);
}

TEST_CASE("random bytes never escape as anything but a parse error") {
  std::mt19937_64 rng(42);
  const std::string alphabet =
      "{}[]\",:0123456789abcdefghijklmnopqrstuvwxyz \n\t.-+eE_";
  for (int i = 0; i < 500; ++i) {
    std::string noise;
    const std::size_t len = rng() % 64;
    for (std::size_t j = 0; j < len; ++j) {
      noise += alphabet[rng() % alphabet.size()];
    }
    CHECK_THROWS_AS((void)parse_bif(noise), ParseError);
    CHECK_THROWS_AS((void)parse_hcd(noise), ParseError);
    if (!noise.starts_with("t,input,value") &&
        !noise.starts_with("t,component,port,value")) {
      CHECK_THROWS_AS((void)parse_schedule_csv(noise), ParseError);
      CHECK_THROWS_AS((void)parse_trace_csv(noise), ParseError);
    }
  }
}

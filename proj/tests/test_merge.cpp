#include <doctest.h>

#include "bra/io.hpp"
#include "bra/merge.hpp"

using namespace bra;

namespace {

std::string fixture(const std::string& rel) {
  return read_file(std::string(FIXTURES_DIR) + "/" + rel);
}

std::map<std::string, double> scores_from(const std::string& rel) {
  std::map<std::string, double> scores;
  const nlohmann::json doc = nlohmann::json::parse(fixture(rel));
  for (const auto& [k, v] : doc.items()) scores[k] = v.get<double>();
  return scores;
}

Hcd pathway_a() { return parse_hcd(fixture("pathways/hcd_a.json")); }
Hcd pathway_b() { return parse_hcd(fixture("pathways/hcd_b.json")); }

std::vector<SharedPair> pathways_shared() {
  return merge_scan(parse_mapping(fixture("pathways/mapping_a.json")),
                    parse_mapping(fixture("pathways/mapping_b.json")));
}

}  // namespace

TEST_CASE("lifting a mapping coarsens targets to their group circuit") {
  Bif bif = parse_bif(fixture("bg/bif.json"));
  BraMapping mapping = parse_mapping(fixture("bg/mapping.json"));
  const BraMapping lifted = lift_mapping(bif, mapping, {"bg"});
  CHECK(lifted.component_map.at("actor") == "bg");
  CHECK(lifted.component_map.at("selector") == "bg");
  // Targets outside the groups stay put.
  BraMapping outside = mapping;
  outside.component_map["extra"] = "thal";
  CHECK(lift_mapping(bif, outside, {"bg"}).component_map.at("extra") == "thal");
}

TEST_CASE("the scan finds exactly the circuits both designs touch") {
  const auto shared = pathways_shared();
  REQUIRE(shared.size() == 2);
  CHECK(shared[0] == SharedPair{"cC", "C", "C2"});
  CHECK(shared[1] == SharedPair{"cD", "D", "D2"});

  BraMapping elsewhere = parse_mapping(fixture("pathways/mapping_b.json"));
  elsewhere.bif_id = "other-atlas";
  CHECK_THROWS_AS(
      (void)merge_scan(parse_mapping(fixture("pathways/mapping_a.json")),
                       elsewhere),
      BraError);

  // Disjoint mappings share nothing.
  BraMapping disjoint = parse_mapping(fixture("pathways/mapping_b.json"));
  disjoint.component_map = {{"Z", "cZ"}};
  CHECK(merge_scan(parse_mapping(fixture("pathways/mapping_a.json")), disjoint)
            .empty());
}

TEST_CASE("select-by-fidelity keeps the better-scored side of each pair") {
  const auto scores_a = scores_from("pathways/scores_a.json");
  const auto scores_b = scores_from("pathways/scores_b.json");
  const MergePlan plan =
      plan_merge(pathway_a(), pathway_b(), pathways_shared(), &scores_a,
                 &scores_b, MergePolicy::select_by_fidelity);

  REQUIRE(plan.decisions.size() == 2);
  CHECK(plan.decisions[0].survivor == "C");   // 0.8 vs 0.7
  CHECK(plan.decisions[1].survivor == "D2");  // 0.6 vs 0.9
  CHECK(!plan.decisions[0].tie);
  CHECK(plan.decisions[0].score_a == 0.8);
  CHECK(plan.decisions[0].score_b == 0.7);

  // Both pathways survive end to end in the merged diagram.
  CHECK(plan.merged.id == "pathway-one+pathway-two");
  CHECK(plan.merged.components.size() == 6);  // A, B, E, F, C, D2
  CHECK(plan.merged.components.contains("C"));
  CHECK(plan.merged.components.contains("D2"));
  CHECK(!plan.merged.components.contains("C2"));
  CHECK(plan.merged.links.size() == 6);
  CHECK(plan.merged.external_inputs.size() == 2);
  CHECK(plan.merged.external_outputs.size() == 2);
  CHECK(!validate_hcd(plan.merged).has_errors());
}

TEST_CASE("equal scores fall to side A and are flagged as a tie") {
  std::map<std::string, double> flat_a{{"C", 0.5}, {"D", 0.5}};
  std::map<std::string, double> flat_b{{"C2", 0.5}, {"D2", 0.5}};
  const MergePlan plan =
      plan_merge(pathway_a(), pathway_b(), pathways_shared(), &flat_a, &flat_b,
                 MergePolicy::select_by_fidelity);
  for (const auto& d : plan.decisions) {
    CHECK(d.tie);
  }
  CHECK(plan.decisions[0].survivor == "C");
  CHECK(plan.decisions[1].survivor == "D");
}

TEST_CASE("selection without scores is refused") {
  const auto scores_a = scores_from("pathways/scores_a.json");
  std::map<std::string, double> missing{{"C2", 0.7}};  // no D2
  CHECK_THROWS_WITH_AS(
      (void)plan_merge(pathway_a(), pathway_b(), pathways_shared(), &scores_a,
                       &missing, MergePolicy::select_by_fidelity),
      doctest::Contains("D2"), BraError);
  CHECK_THROWS_AS(
      (void)plan_merge(pathway_a(), pathway_b(), pathways_shared(), nullptr,
                       nullptr, MergePolicy::select_by_fidelity),
      BraError);
}

TEST_CASE("redesign emits a placeholder union component marked TODO") {
  const MergePlan plan =
      plan_merge(pathway_a(), pathway_b(), pathways_shared(), nullptr, nullptr,
                 MergePolicy::redesign);
  REQUIRE(plan.decisions.size() == 2);
  CHECK(plan.decisions[0].survivor == "C+C2");
  REQUIRE(plan.merged.components.contains("C+C2"));
  const Component& placeholder = plan.merged.components.at("C+C2");
  REQUIRE(!placeholder.behavior_claims.empty());
  CHECK(placeholder.behavior_claims.front().claim.find("TODO") !=
        std::string::npos);
  CHECK(!validate_hcd(plan.merged).has_errors());
}

TEST_CASE("conflicting port semantics are renamed and flagged") {
  Hcd a = pathway_a();
  Hcd b = pathway_b();
  // Same port name, different meaning on the shared component.
  b.components.at("C2").required_ports[0].signal_semantics = "inhibit";
  b.links.at("b1").signal_semantics = "inhibit";

  const auto scores_a = scores_from("pathways/scores_a.json");
  const auto scores_b = scores_from("pathways/scores_b.json");
  const MergePlan plan = plan_merge(a, b, pathways_shared(), &scores_a, &scores_b,
                                    MergePolicy::select_by_fidelity);
  CHECK(plan.decisions[0].semantic_conflict);
  CHECK(!plan.renames.empty());
  // The losing side's conflicting port survives under a prefixed name.
  const Component& merged_c = plan.merged.components.at("C");
  CHECK(merged_c.find_required("pathway-two:in") != nullptr);
  CHECK(plan.merged.links.at("b1").to.port == "pathway-two:in");
  CHECK(!validate_hcd(plan.merged).has_errors());
}

TEST_CASE("colliding component ids from side B are prefixed and recorded") {
  Hcd a = pathway_a();
  Hcd b = pathway_b();
  // Give side B a non-shared component whose id collides with side A's.
  auto renamed = b.components.at("F");
  b.components.erase("F");
  renamed.id = "A";
  b.components.emplace("A", renamed);
  b.links.at("b3").to.component = "A";
  b.external_outputs[0].component = "A";

  const auto scores_a = scores_from("pathways/scores_a.json");
  const auto scores_b = scores_from("pathways/scores_b.json");
  const MergePlan plan = plan_merge(a, b, pathways_shared(), &scores_a, &scores_b,
                                    MergePolicy::select_by_fidelity);
  CHECK(plan.merged.components.contains("pathway-two:A"));
  bool recorded = false;
  for (const auto& r : plan.renames) {
    recorded = recorded || r.find("pathway-two:A") != std::string::npos;
  }
  CHECK(recorded);
}

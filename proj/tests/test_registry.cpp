#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "bra/io.hpp"
#include "bra/registry.hpp"

using namespace bra;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh store directory per test case.
fs::path fresh_store(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("bra-registry-" + tag);
  fs::remove_all(dir);
  return dir;
}

json bg_bif_payload() {
  return json::parse(
      read_file(std::string(FIXTURES_DIR) + "/bg/bif.json"));
}

json tiny_hcd_payload() {
  return json::parse(read_file(std::string(FIXTURES_DIR) + "/bg/hcd.json"));
}

}  // namespace

TEST_CASE("submission versions an id and defaults to review") {
  auto store = Registry::open(fresh_store("versions"));
  const auto v1 = store.submit(DocKind::bif, "atlas", bg_bif_payload());
  CHECK(v1.version == 1);
  CHECK(v1.state == EntryState::in_review);
  CHECK(v1.ref() == "bif/atlas/v1");
  CHECK(!v1.review_log.empty());

  const auto v2 = store.submit(DocKind::bif, "atlas", bg_bif_payload());
  CHECK(v2.version == 2);
  REQUIRE(store.latest(DocKind::bif, "atlas").has_value());
  CHECK(store.latest(DocKind::bif, "atlas")->version == 2);
  CHECK(!store.latest(DocKind::hcd, "atlas").has_value());
  CHECK_THROWS_AS((void)store.submit(DocKind::bif, "", json::object()),
                  BraError);
}

TEST_CASE("drafts must pass through review before any verdict") {
  auto store = Registry::open(fresh_store("states"));
  auto entry =
      store.submit(DocKind::bif, "atlas", bg_bif_payload(), false);
  CHECK(entry.state == EntryState::draft);
  CHECK(entry.review_log.empty());

  CHECK_THROWS_WITH_AS(
      (void)store.certify(DocKind::bif, "atlas", "rev", ""),
      doctest::Contains("draft"), BraError);
  CHECK_THROWS_AS((void)store.reject(DocKind::bif, "atlas", "rev", ""),
                  BraError);

  entry = store.begin_review(DocKind::bif, "atlas");
  CHECK(entry.state == EntryState::in_review);
  CHECK_THROWS_AS((void)store.begin_review(DocKind::bif, "atlas"), BraError);

  entry = store.reject(DocKind::bif, "atlas", "reviewer", "not convincing");
  CHECK(entry.state == EntryState::rejected);
  // Rejected entries are terminal.
  CHECK_THROWS_AS((void)store.certify(DocKind::bif, "atlas", "rev", ""),
                  BraError);
  CHECK_THROWS_AS((void)store.begin_review(DocKind::bif, "atlas"), BraError);
  CHECK_THROWS_AS((void)store.certify(DocKind::bif, "ghost", "rev", ""),
                  BraError);
}

TEST_CASE("certifying a circuit graph demands references on every element") {
  auto store = Registry::open(fresh_store("authenticity"));
  json bare = bg_bif_payload();
  bare["connections"][0]["references"] = json::array();
  store.submit(DocKind::bif, "bare", bare);
  CHECK_THROWS_WITH_AS((void)store.certify(DocKind::bif, "bare", "rev", ""),
                       doctest::Contains("unreferenced"), BraError);

  store.submit(DocKind::bif, "atlas", bg_bif_payload());
  const auto entry = store.certify(DocKind::bif, "atlas", "reviewer", "ok");
  CHECK(entry.state == EntryState::certified);
  CHECK(entry.certified_at != 0);
  CHECK(entry.review_log.back().verdict == "certified");
  // Certified entries are immutable; a resubmission opens a new version.
  CHECK_THROWS_AS((void)store.certify(DocKind::bif, "atlas", "rev", ""),
                  BraError);
  CHECK(store.submit(DocKind::bif, "atlas", bg_bif_payload()).version == 2);
}

TEST_CASE("designs certify only with a certifiable adequacy report attached") {
  auto store = Registry::open(fresh_store("adequacy"));
  store.submit(DocKind::hcd, "design", tiny_hcd_payload());
  CHECK_THROWS_WITH_AS(
      (void)store.certify(DocKind::hcd, "design", "rev", ""),
      doctest::Contains("adequacy"), BraError);
  CHECK_THROWS_AS(
      (void)store.certify(DocKind::hcd, "design", "rev", "", false), BraError);
  const auto entry = store.certify(DocKind::hcd, "design", "rev", "", true);
  CHECK(entry.state == EntryState::certified);
}

TEST_CASE("novelty flags re-registered anatomy even with new citations") {
  auto store = Registry::open(fresh_store("novelty"));
  store.submit(DocKind::bif, "atlas", bg_bif_payload());

  auto dupes = store.novelty_check(DocKind::bif, bg_bif_payload());
  const auto total = bg_bif_payload()["circuits"].size() +
                     bg_bif_payload()["connections"].size();
  CHECK(dupes.size() == total);
  CHECK(dupes.front().existing_ref == "bif/atlas/v1");

  // Citations are excluded from content identity.
  json recited = bg_bif_payload();
  recited["circuits"][0]["references"][0]["text"] = "a different paper";
  CHECK(store.novelty_check(DocKind::bif, recited).size() == total);

  // Changing the anatomy itself clears that element.
  json altered = bg_bif_payload();
  altered["circuits"][0]["label"] = "somewhere-new";
  CHECK(store.novelty_check(DocKind::bif, altered).size() == total - 1);
}

TEST_CASE("queries filter and come back in a stable order") {
  auto store = Registry::open(fresh_store("query"));
  store.submit(DocKind::bif, "atlas", bg_bif_payload());
  store.submit(DocKind::hcd, "design", tiny_hcd_payload());
  store.submit(DocKind::bif, "atlas", bg_bif_payload());

  CHECK(store.query().size() == 3);

  RegistryFilter by_kind;
  by_kind.kind = DocKind::bif;
  const auto bifs = store.query(by_kind);
  REQUIRE(bifs.size() == 2);
  CHECK(bifs[0].version == 1);
  CHECK(bifs[1].version == 2);

  RegistryFilter by_state;
  by_state.state = EntryState::certified;
  CHECK(store.query(by_state).empty());
  store.certify(DocKind::bif, "atlas", "rev", "");
  CHECK(store.query(by_state).size() == 1);

  RegistryFilter by_label;
  by_label.label_prefix = "basal ganglia";
  const auto labeled = store.query(by_label);
  CHECK(!labeled.empty());
  for (const auto& e : labeled) CHECK(e.kind == DocKind::bif);

  RegistryFilter by_roi;
  by_roi.kind = DocKind::bif;
  by_roi.roi_member = "snc";
  CHECK(store.query(by_roi).size() == 2);
  by_roi.roi_member = "nothing-here";
  CHECK(store.query(by_roi).empty());
}

TEST_CASE("the store survives a reopen with the expected file layout") {
  const fs::path dir = fresh_store("reopen");
  {
    auto store = Registry::open(dir);
    store.submit(DocKind::bif, "atlas", bg_bif_payload());
    store.certify(DocKind::bif, "atlas", "reviewer", "ok");
    store.submit(DocKind::bif, "atlas", bg_bif_payload());
  }
  CHECK(fs::exists(dir / "index.json"));
  CHECK(fs::exists(dir / "bif" / "atlas" / "v1.json"));
  CHECK(fs::exists(dir / "bif" / "atlas" / "v2.json"));

  auto reopened = Registry::open(dir);
  const auto entries = reopened.query();
  REQUIRE(entries.size() == 2);
  REQUIRE(reopened.latest(DocKind::bif, "atlas").has_value());
  CHECK(reopened.latest(DocKind::bif, "atlas")->version == 2);
  CHECK(reopened.query({.state = EntryState::certified}).size() == 1);
  CHECK(!reopened.novelty_check(DocKind::bif, bg_bif_payload()).empty());
}

TEST_CASE("the store directory comes from the environment when set") {
  ::unsetenv("BRA_STORE");
  CHECK(default_store_dir("fallback") == fs::path("fallback"));
  ::setenv("BRA_STORE", "/tmp/elsewhere", 1);
  CHECK(default_store_dir("fallback") == fs::path("/tmp/elsewhere"));
  ::unsetenv("BRA_STORE");
}

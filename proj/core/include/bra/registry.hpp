#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bra/common.hpp"

namespace bra {

enum class DocKind { bif, hcd, mapping, tmpl, rules };
enum class EntryState { draft, in_review, certified, rejected };

std::string_view to_string(DocKind k);
std::string_view to_string(EntryState s);
DocKind doc_kind_from_string(std::string_view text);
EntryState entry_state_from_string(std::string_view text);

struct ReviewEvent {
  std::int64_t timestamp = 0;  // unix seconds
  std::string reviewer;
  std::string verdict;  // "submitted" | "certified" | "rejected"
  std::string notes;

  bool operator==(const ReviewEvent&) const = default;
};

struct RegistryEntry {
  DocKind kind = DocKind::bif;
  std::string id;
  int version = 1;
  EntryState state = EntryState::draft;
  std::int64_t created_at = 0;
  std::int64_t certified_at = 0;  // 0 until certified
  std::vector<ReviewEvent> review_log;
  std::vector<std::string> content_keys;  // per-element canonical hashes
  nlohmann::json payload;

  [[nodiscard]] std::string ref() const;  // "<kind>/<id>/v<version>"
};

struct RegistryFilter {
  std::optional<DocKind> kind;
  std::optional<EntryState> state;
  std::string label_prefix;  // matches any element label in the payload
  std::string roi_member;    // id appearing in the payload's roi/circuits
};

struct DuplicateElement {
  std::string existing_ref;
  std::string content_key;

  bool operator==(const DuplicateElement&) const = default;
};

/// Per-element content keys of a document, excluding references and
/// free-text notes, so re-citing the same anatomy is a duplicate.
std::vector<std::string> content_keys_for(DocKind kind,
                                          const nlohmann::json& payload);

// File-backed store: <dir>/<kind>/<id>/v<version>.json plus
// <dir>/index.json. Writes take an exclusive lock file; reads work on
// the loaded snapshot. Certified entries are immutable; resubmission of
// an id creates a new version.
class Registry {
 public:
  static Registry open(const std::filesystem::path& dir);

  /// New entry for this id (version = latest + 1). With `for_review`
  /// the entry is logged straight into in-review; otherwise it stays a
  /// draft.
  RegistryEntry submit(DocKind kind, const std::string& id,
                       const nlohmann::json& payload, bool for_review = true);

  /// Moves a draft into review.
  RegistryEntry begin_review(DocKind kind, const std::string& id);

  /// in-review -> certified. BIFs require every element to carry at
  /// least one reference; HCDs and mappings require an adequacy report
  /// flagged certifiable. Illegal transitions throw naming the state.
  RegistryEntry certify(DocKind kind, const std::string& id,
                        const std::string& reviewer, const std::string& notes,
                        const std::optional<bool>& adequacy_certifiable = {});

  /// in-review -> rejected.
  RegistryEntry reject(DocKind kind, const std::string& id,
                       const std::string& reviewer, const std::string& notes);

  /// Element-level duplicate detection against every stored entry.
  [[nodiscard]] std::vector<DuplicateElement> novelty_check(
      DocKind kind, const nlohmann::json& payload) const;

  /// Deterministic order: certification time (submission time for
  /// uncertified entries), then id, then version.
  [[nodiscard]] std::vector<RegistryEntry> query(
      const RegistryFilter& filter = {}) const;

  [[nodiscard]] std::optional<RegistryEntry> latest(DocKind kind,
                                                    const std::string& id) const;

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  RegistryEntry& latest_mut(DocKind kind, const std::string& id);
  void persist(const RegistryEntry& entry);
  void write_index() const;

  std::filesystem::path dir_;
  std::vector<RegistryEntry> entries_;
};

/// Store directory from BRA_STORE, or `fallback` when unset.
std::filesystem::path default_store_dir(const std::string& fallback = "store");

}  // namespace bra

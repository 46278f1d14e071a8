#include "bra/registry.hpp"

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "bra/io.hpp"

namespace bra {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(DocKind k) {
  switch (k) {
    case DocKind::bif:
      return "bif";
    case DocKind::hcd:
      return "hcd";
    case DocKind::mapping:
      return "mapping";
    case DocKind::tmpl:
      return "template";
    case DocKind::rules:
      return "rules";
  }
  return "bif";
}

std::string_view to_string(EntryState s) {
  switch (s) {
    case EntryState::draft:
      return "draft";
    case EntryState::in_review:
      return "in-review";
    case EntryState::certified:
      return "certified";
    case EntryState::rejected:
      return "rejected";
  }
  return "draft";
}

DocKind doc_kind_from_string(std::string_view text) {
  if (text == "bif") return DocKind::bif;
  if (text == "hcd") return DocKind::hcd;
  if (text == "mapping") return DocKind::mapping;
  if (text == "template") return DocKind::tmpl;
  if (text == "rules") return DocKind::rules;
  throw BraError("unrecognized document kind: '" + std::string(text) + "'");
}

EntryState entry_state_from_string(std::string_view text) {
  if (text == "draft") return EntryState::draft;
  if (text == "in-review") return EntryState::in_review;
  if (text == "certified") return EntryState::certified;
  if (text == "rejected") return EntryState::rejected;
  throw BraError("unrecognized entry state: '" + std::string(text) + "'");
}

std::string RegistryEntry::ref() const {
  return std::string(to_string(kind)) + "/" + id + "/v" +
         std::to_string(version);
}

namespace {

json strip_free_text(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : j.items()) {
      if (key == "references" || key == "citation" || key == "notes" ||
          key == "description" || key == "evidence") {
        continue;
      }
      out[key] = strip_free_text(value);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& value : j) out.push_back(strip_free_text(value));
    return out;
  }
  return j;
}

std::string key_of(const std::string& material) {
  return hash_hex(fnv1a64(material));
}

std::string label_of(const json& payload, const std::string& circuit_id) {
  if (payload.contains("circuits")) {
    for (const auto& c : payload.at("circuits")) {
      if (c.value("id", "") == circuit_id) return c.value("label", circuit_id);
    }
  }
  return circuit_id;
}

}  // namespace

std::vector<std::string> content_keys_for(DocKind kind, const json& payload) {
  std::vector<std::string> keys;
  if (kind == DocKind::bif) {
    // Anatomy-identifying material: species + label path + salient
    // attributes, never references.
    for (const auto& c : payload.value("circuits", json::array())) {
      std::ostringstream os;
      os << "circuit|" << c.value("species", "unknown") << '|'
         << c.value("label", "") << '|' << c.value("kind", "uniform") << '|'
         << c.value("sign", "unknown") << '|'
         << c.value("transmitter", "unknown") << '|';
      if (c.contains("cell_count")) os << c.at("cell_count").dump();
      os << '|' << (c.value("neocortical", false) ? '1' : '0') << '|';
      std::vector<std::string> member_labels;
      for (const auto& m : c.value("members", json::array())) {
        member_labels.push_back(label_of(payload, m.get<std::string>()));
      }
      std::sort(member_labels.begin(), member_labels.end());
      for (const auto& label : member_labels) os << label << ';';
      keys.push_back(key_of(os.str()));
    }
    for (const auto& c : payload.value("connections", json::array())) {
      std::ostringstream os;
      os << "connection|" << c.value("species", "unknown") << '|'
         << label_of(payload, c.value("input", "")) << '|'
         << label_of(payload, c.value("output", "")) << '|'
         << c.value("transmitter", "unknown") << '|'
         << c.value("hierarchy", "n/a") << '|';
      if (c.contains("size")) os << c.at("size").dump();
      keys.push_back(key_of(os.str()));
    }
    return keys;
  }

  auto element_keys = [&](const char* field, const char* tag) {
    for (const auto& element : payload.value(field, json::array())) {
      keys.push_back(key_of(std::string(tag) + "|" +
                            strip_free_text(element).dump()));
    }
  };
  switch (kind) {
    case DocKind::hcd:
      element_keys("components", "component");
      element_keys("links", "link");
      break;
    case DocKind::tmpl:
      element_keys("roles", "role");
      element_keys("role_edges", "role-edge");
      break;
    case DocKind::rules:
      element_keys("rules", "rule");
      break;
    case DocKind::mapping:
      keys.push_back(key_of("mapping|" + strip_free_text(payload).dump()));
      break;
    case DocKind::bif:
      break;
  }
  return keys;
}

namespace {

json entry_to_json(const RegistryEntry& e) {
  json log = json::array();
  for (const auto& event : e.review_log) {
    log.push_back({{"timestamp", event.timestamp},
                   {"reviewer", event.reviewer},
                   {"verdict", event.verdict},
                   {"notes", event.notes}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", std::string(to_string(e.kind))},
          {"id", e.id},
          {"version", e.version},
          {"state", std::string(to_string(e.state))},
          {"created_at", e.created_at},
          {"certified_at", e.certified_at},
          {"review_log", log},
          {"content_keys", e.content_keys},
          {"payload", e.payload}};
}

RegistryEntry entry_from_json(const json& j) {
  RegistryEntry e;
  e.kind = doc_kind_from_string(j.at("kind").get<std::string>());
  e.id = j.at("id").get<std::string>();
  e.version = j.at("version").get<int>();
  e.state = entry_state_from_string(j.at("state").get<std::string>());
  e.created_at = j.at("created_at").get<std::int64_t>();
  e.certified_at = j.at("certified_at").get<std::int64_t>();
  for (const auto& event : j.at("review_log")) {
    e.review_log.push_back({event.at("timestamp").get<std::int64_t>(),
                            event.at("reviewer").get<std::string>(),
                            event.at("verdict").get<std::string>(),
                            event.at("notes").get<std::string>()});
  }
  e.content_keys = j.at("content_keys").get<std::vector<std::string>>();
  e.payload = j.at("payload");
  return e;
}

// Exclusive advisory lock held for the duration of a write.
class StoreLock {
 public:
  explicit StoreLock(const fs::path& dir) {
    fd_ = ::open((dir / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw BraError("cannot open store lock in " + dir.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw BraError("cannot lock store " + dir.string());
    }
  }
  ~StoreLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

std::int64_t now_seconds() {
  return static_cast<std::int64_t>(std::time(nullptr));
}

}  // namespace

Registry Registry::open(const fs::path& dir) {
  Registry registry;
  registry.dir_ = dir;
  fs::create_directories(dir);

  const fs::path index_path = dir / "index.json";
  if (!fs::exists(index_path)) return registry;

  json index;
  try {
    index = json::parse(read_file(index_path.string()));
  } catch (const json::exception& e) {
    throw BraError("corrupted store index at " + index_path.string() + ": " +
                   e.what());
  }
  for (const auto& ref : index.at("entries")) {
    const fs::path entry_path =
        dir / ref.at("kind").get<std::string>() /
        ref.at("id").get<std::string>() /
        ("v" + std::to_string(ref.at("version").get<int>()) + ".json");
    try {
      registry.entries_.push_back(
          entry_from_json(json::parse(read_file(entry_path.string()))));
    } catch (const json::exception& e) {
      throw BraError("corrupted store entry at " + entry_path.string() + ": " +
                     e.what());
    }
  }
  return registry;
}

RegistryEntry Registry::submit(DocKind kind, const std::string& id,
                               const json& payload, bool for_review) {
  if (id.empty()) throw BraError("entry id must not be empty");

  int version = 0;
  for (const auto& e : entries_) {
    if (e.kind == kind && e.id == id) version = std::max(version, e.version);
  }

  RegistryEntry entry;
  entry.kind = kind;
  entry.id = id;
  entry.version = version + 1;
  entry.state = for_review ? EntryState::in_review : EntryState::draft;
  entry.created_at = now_seconds();
  entry.content_keys = content_keys_for(kind, payload);
  entry.payload = payload;
  if (for_review) {
    entry.review_log.push_back(
        {entry.created_at, "", "submitted", "submitted for review"});
  }

  StoreLock lock(dir_);
  entries_.push_back(entry);
  persist(entry);
  write_index();
  return entry;
}

RegistryEntry& Registry::latest_mut(DocKind kind, const std::string& id) {
  RegistryEntry* found = nullptr;
  for (auto& e : entries_) {
    if (e.kind == kind && e.id == id &&
        (!found || e.version > found->version)) {
      found = &e;
    }
  }
  if (!found) {
    throw BraError("no entry '" + id + "' of kind " +
                   std::string(to_string(kind)));
  }
  return *found;
}

RegistryEntry Registry::begin_review(DocKind kind, const std::string& id) {
  RegistryEntry& entry = latest_mut(kind, id);
  if (entry.state != EntryState::draft) {
    throw BraError("illegal transition: entry is " +
                   std::string(to_string(entry.state)) +
                   ", expected draft");
  }
  entry.state = EntryState::in_review;
  entry.review_log.push_back({now_seconds(), "", "submitted",
                              "moved to review"});
  StoreLock lock(dir_);
  persist(entry);
  write_index();
  return entry;
}

RegistryEntry Registry::certify(DocKind kind, const std::string& id,
                                const std::string& reviewer,
                                const std::string& notes,
                                const std::optional<bool>& adequacy_certifiable) {
  RegistryEntry& entry = latest_mut(kind, id);
  if (entry.state != EntryState::in_review) {
    throw BraError("illegal transition: entry is " +
                   std::string(to_string(entry.state)) +
                   ", expected in-review");
  }

  if (kind == DocKind::bif) {
    std::vector<std::string> unreferenced;
    auto scan = [&](const char* field) {
      for (const auto& element : entry.payload.value(field, json::array())) {
        if (element.value("references", json::array()).empty()) {
          unreferenced.push_back(element.value("id", "?"));
        }
      }
    };
    scan("circuits");
    scan("connections");
    if (!unreferenced.empty()) {
      std::string ids;
      for (const auto& u : unreferenced) ids += (ids.empty() ? "" : ", ") + u;
      throw BraError("authenticity failure: unreferenced elements: " + ids);
    }
  }
  if (kind == DocKind::hcd || kind == DocKind::mapping) {
    if (!adequacy_certifiable.has_value()) {
      throw BraError("certification of an " + std::string(to_string(kind)) +
                     " requires an attached adequacy report");
    }
    if (!*adequacy_certifiable) {
      throw BraError("attached adequacy report is not certifiable");
    }
  }

  entry.state = EntryState::certified;
  entry.certified_at = now_seconds();
  entry.review_log.push_back({entry.certified_at, reviewer, "certified", notes});
  StoreLock lock(dir_);
  persist(entry);
  write_index();
  return entry;
}

RegistryEntry Registry::reject(DocKind kind, const std::string& id,
                               const std::string& reviewer,
                               const std::string& notes) {
  RegistryEntry& entry = latest_mut(kind, id);
  if (entry.state != EntryState::in_review) {
    throw BraError("illegal transition: entry is " +
                   std::string(to_string(entry.state)) +
                   ", expected in-review");
  }
  entry.state = EntryState::rejected;
  entry.review_log.push_back({now_seconds(), reviewer, "rejected", notes});
  StoreLock lock(dir_);
  persist(entry);
  write_index();
  return entry;
}

std::vector<DuplicateElement> Registry::novelty_check(
    DocKind kind, const json& payload) const {
  const std::vector<std::string> keys = content_keys_for(kind, payload);
  std::vector<DuplicateElement> duplicates;
  for (const auto& key : keys) {
    for (const auto& e : entries_) {
      if (e.kind != kind) continue;
      if (std::find(e.content_keys.begin(), e.content_keys.end(), key) !=
          e.content_keys.end()) {
        duplicates.push_back({e.ref(), key});
        break;  // one report per element key
      }
    }
  }
  return duplicates;
}

std::vector<RegistryEntry> Registry::query(const RegistryFilter& filter) const {
  std::vector<RegistryEntry> result;
  for (const auto& e : entries_) {
    if (filter.kind && e.kind != *filter.kind) continue;
    if (filter.state && e.state != *filter.state) continue;
    if (!filter.label_prefix.empty()) {
      bool matched = false;
      std::function<void(const json&)> scan = [&](const json& j) {
        if (matched) return;
        if (j.is_object()) {
          if (j.contains("label") && j.at("label").is_string() &&
              j.at("label").get<std::string>().starts_with(
                  filter.label_prefix)) {
            matched = true;
            return;
          }
          for (const auto& [key, value] : j.items()) scan(value);
        } else if (j.is_array()) {
          for (const auto& value : j) scan(value);
        }
      };
      scan(e.payload);
      if (!matched) continue;
    }
    if (!filter.roi_member.empty()) {
      bool matched = false;
      for (const auto& c : e.payload.value("circuits", json::array())) {
        if (c.value("id", "") == filter.roi_member) matched = true;
      }
      for (const auto& r : e.payload.value("roi", json::array())) {
        if (r.is_string() && r.get<std::string>() == filter.roi_member) {
          matched = true;
        }
      }
      if (!matched) continue;
    }
    result.push_back(e);
  }
  std::sort(result.begin(), result.end(),
            [](const RegistryEntry& a, const RegistryEntry& b) {
              const std::int64_t ta =
                  a.certified_at ? a.certified_at : a.created_at;
              const std::int64_t tb =
                  b.certified_at ? b.certified_at : b.created_at;
              return std::tie(ta, a.id, a.version) <
                     std::tie(tb, b.id, b.version);
            });
  return result;
}

std::optional<RegistryEntry> Registry::latest(DocKind kind,
                                              const std::string& id) const {
  std::optional<RegistryEntry> found;
  for (const auto& e : entries_) {
    if (e.kind == kind && e.id == id && (!found || e.version > found->version)) {
      found = e;
    }
  }
  return found;
}

void Registry::persist(const RegistryEntry& entry) {
  const fs::path entry_dir =
      dir_ / std::string(to_string(entry.kind)) / entry.id;
  fs::create_directories(entry_dir);
  write_file((entry_dir / ("v" + std::to_string(entry.version) + ".json"))
                 .string(),
             dump_canonical(entry_to_json(entry)));
}

void Registry::write_index() const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"kind", std::string(to_string(e.kind))},
                       {"id", e.id},
                       {"version", e.version},
                       {"state", std::string(to_string(e.state))}});
  }
  write_file((dir_ / "index.json").string(),
             dump_canonical(
                 {{"format_version", kFormatVersion}, {"entries", entries}}));
}

std::filesystem::path default_store_dir(const std::string& fallback) {
  if (const char* env = std::getenv("BRA_STORE"); env && *env) return env;
  return fallback;
}

}  // namespace bra

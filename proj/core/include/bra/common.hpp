#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bra {

/// Toolkit-level failure (bad arguments, unresolved ids, illegal transitions).
/// Domain findings that are part of a result go into reports instead.
struct BraError : std::runtime_error {
  explicit BraError(const std::string& what) : std::runtime_error(what) {}
};

enum class Species {
  unknown,
  human,
  macaque,
  marmoset,
  rat,
  mouse,
  drosophila,
};

enum class Transmitter {
  unknown,
  glutamate,
  gaba,
  dopamine,
  serotonin,
  acetylcholine,
  noradrenaline,
};

enum class Sign {
  unknown,
  excitatory,
  inhibitory,
  modulatory,
};

enum class Hierarchy {
  na,
  feedforward,
  feedback,
  lateral,
};

std::string_view to_string(Species s);
std::string_view to_string(Transmitter t);
std::string_view to_string(Sign s);
std::string_view to_string(Hierarchy h);

// Throw BraError on unrecognized text; absent/empty text maps to the
// explicit "unknown" (or "n/a") member, never to a silent default elsewhere.
Species species_from_string(std::string_view text);
Transmitter transmitter_from_string(std::string_view text);
Sign sign_from_string(std::string_view text);
Hierarchy hierarchy_from_string(std::string_view text);

struct Citation {
  std::string text;
  bool peer_reviewed = false;

  bool operator==(const Citation&) const = default;
};

enum class Severity { warning, error };

std::string_view to_string(Severity s);

struct Finding {
  std::string element;  // id of the offending element, may be empty
  std::string rule;     // stable rule name, e.g. "input-not-uniform"
  Severity severity = Severity::error;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  [[nodiscard]] bool ok() const { return findings.empty(); }
  [[nodiscard]] bool has_errors() const;
  [[nodiscard]] std::size_t error_count() const;
  [[nodiscard]] std::size_t warning_count() const;

  void add(std::string element, std::string rule, Severity severity,
           std::string message);

  bool operator==(const ValidationReport&) const = default;
};

/// FNV-1a over a byte string; used for content keys and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lower-case hex rendering of a 64-bit hash.
std::string hash_hex(std::uint64_t value);

}  // namespace bra

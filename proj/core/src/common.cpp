#include "bra/common.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace bra {
namespace {

template <typename E, std::size_t N>
std::string_view enum_name(E value, const std::array<std::string_view, N>& names) {
  return names[static_cast<std::size_t>(value)];
}

template <typename E, std::size_t N>
E enum_parse(std::string_view text, const std::array<std::string_view, N>& names,
             std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  throw BraError("unrecognized " + std::string(what) + ": '" +
                 std::string(text) + "'");
}

constexpr std::array<std::string_view, 7> kSpecies = {
    "unknown", "human", "macaque", "marmoset", "rat", "mouse", "drosophila"};
constexpr std::array<std::string_view, 7> kTransmitters = {
    "unknown",   "glutamate",     "gaba",         "dopamine",
    "serotonin", "acetylcholine", "noradrenaline"};
constexpr std::array<std::string_view, 4> kSigns = {"unknown", "excitatory",
                                                    "inhibitory", "modulatory"};
constexpr std::array<std::string_view, 4> kHierarchies = {
    "n/a", "feedforward", "feedback", "lateral"};

}  // namespace

std::string_view to_string(Species s) { return enum_name(s, kSpecies); }
std::string_view to_string(Transmitter t) { return enum_name(t, kTransmitters); }
std::string_view to_string(Sign s) { return enum_name(s, kSigns); }
std::string_view to_string(Hierarchy h) { return enum_name(h, kHierarchies); }

Species species_from_string(std::string_view text) {
  if (text.empty()) return Species::unknown;
  return enum_parse<Species>(text, kSpecies, "species");
}

Transmitter transmitter_from_string(std::string_view text) {
  if (text.empty()) return Transmitter::unknown;
  return enum_parse<Transmitter>(text, kTransmitters, "transmitter");
}

Sign sign_from_string(std::string_view text) {
  if (text.empty()) return Sign::unknown;
  return enum_parse<Sign>(text, kSigns, "sign");
}

Hierarchy hierarchy_from_string(std::string_view text) {
  if (text.empty()) return Hierarchy::na;
  return enum_parse<Hierarchy>(text, kHierarchies, "hierarchy");
}

std::string_view to_string(Severity s) {
  return s == Severity::warning ? "warning" : "error";
}

bool ValidationReport::has_errors() const { return error_count() > 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::error;
      }));
}

std::size_t ValidationReport::warning_count() const {
  return findings.size() - error_count();
}

void ValidationReport::add(std::string element, std::string rule,
                           Severity severity, std::string message) {
  findings.push_back(Finding{std::move(element), std::move(rule), severity,
                             std::move(message)});
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hash_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace bra

#pragma once

// Behavioral signature scanning. A signature is a bad-prefix monitor over
// action labels; a model matches when some behavior of its flattened
// transition system drives the monitor into a final state.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimic/checker.hpp"

namespace mimic {

enum class Severity { low, medium, high, critical };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view text);

struct Signature {
  std::string id;
  std::string description;
  SequentialAutomaton pattern;
  Severity severity = Severity::medium;

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// A signature that can never match (no final states) is rejected.
ValidationReport validate(const Signature& s);

struct SignatureMatch {
  std::string id;
  Severity severity = Severity::medium;
  bool matched = false;
  std::optional<Counterexample> witness;  // state ids of the scanned transition system
};

struct DetectionReport {
  std::string model;
  std::map<std::string, std::string> metadata;
  std::vector<SignatureMatch> matches;  // in signature order
  CheckStats stats;                     // of the scanned transition system

  bool any() const;
};

/// Flattens once, then one product and accepting-state search per signature.
DetectionReport detect(const MimicAutomaton& ma, const MimicConfiguration& initial,
                       std::span<const MacroInput> universe, std::span<const Signature> signatures,
                       std::size_t bound = kDefaultStateBound);
DetectionReport detect(const MimicAutomaton& ma, const TransitionSystem& ts, std::span<const Signature> signatures);

/// Reads signature blocks (and the sa blocks their patterns name) from files
/// and directories (every regular file directly inside). Throws
/// ParseFailure on diagnostics, including an id declared in two files.
std::vector<Signature> load_signatures(std::span<const std::filesystem::path> sources);

}  // namespace mimic

#pragma once

// JSON and DOT renderings of check results, detection reports, traces and
// state graphs. Every result object carries the keys "verdict",
// "counterexample", "probability", "error_bound" and "stats".

#include <string>

#include <json.hpp>

#include "mimic/checker.hpp"
#include "mimic/detect.hpp"
#include "mimic/format.hpp"

namespace mimic {

using Json = nlohmann::ordered_json;

/// Counterexample hops as {"state", "input", "action"} plus a final {"state"} entry.
Json counterexample_json(const MimicAutomaton& ma, const TransitionSystem& ts, const Counterexample& cx);

/// `ts` is required to describe counterexample states; it may be null for probability results.
Json check_json(const MimicAutomaton& ma, const TransitionSystem* ts, const CheckResult& r);
Json detection_json(const MimicAutomaton& ma, const TransitionSystem& ts, const DetectionReport& r);
Json trace_json(const MimicAutomaton& ma, const MimicConfiguration& initial, const MacroTrace& trace,
                const MimicConfiguration& final_config);
Json diagnostics_json(const std::vector<Diagnostic>& diags);

std::string check_text(const MimicAutomaton& ma, const TransitionSystem* ts, const CheckResult& r);
std::string detection_text(const MimicAutomaton& ma, const TransitionSystem& ts, const DetectionReport& r);
std::string trace_text(const MimicAutomaton& ma, const MimicConfiguration& initial, const MacroTrace& trace);

std::string to_dot(const MimicAutomaton& ma, const TransitionSystem& ts);
std::string to_dot(const MimicAutomaton& ma, const Dtmc& dtmc);
/// Global-map graph of a scheduler over every lattice (at most `limit` of them).
std::string raw_rule_dot(const Scheduler& s, std::size_t limit = 4096);

}  // namespace mimic

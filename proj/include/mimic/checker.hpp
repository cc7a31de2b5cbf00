#pragma once

// Model checking of mimic automata in three passes: validation of the four
// component kinds (SA, CA, HA, probabilistic), explicit construction of the
// reachable configuration graph (a transition system, or a DTMC when a PCA is
// involved), then property checks with shortest counterexamples.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimic/composition.hpp"
#include "mimic/predicate.hpp"

namespace mimic {

inline constexpr std::size_t kDefaultStateBound = 1'000'000;
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxIterations = 100'000;
inline constexpr std::size_t kDefaultTrials = 10'000;

/// Action label of a tick: "output(<w>)" with symbols joined by ',' or "abstain".
std::string action_label(const std::optional<Word>& output);

std::string render_input(const MimicAutomaton& ma, const MacroInput& input);

struct ComponentReports {
  ValidationReport sa;
  ValidationReport ca;
  ValidationReport ha;
  ValidationReport pa;  // probabilistic (PCA) components
  /// Binding-level defects (references, nesting, readouts) found by validate(ma).
  ValidationReport composition;

  bool clean() const { return sa.empty() && ca.empty() && ha.empty() && pa.empty() && composition.empty(); }
};

ComponentReports check_components(const MimicAutomaton& ma);

struct TsEdge {
  std::size_t input;  // index into TransitionSystem::inputs
  std::string label;
  std::size_t target;
};

struct TransitionSystem {
  std::vector<MacroInput> inputs;
  /// Decoded view of each state: the configuration at first (shortest) discovery.
  std::vector<MimicConfiguration> states;
  std::vector<std::vector<TsEdge>> edges;
  std::vector<std::set<std::string>> props;
  std::size_t initial = 0;
  /// Product systems only: underlying state and pattern state of each product state.
  std::vector<std::size_t> base_state;
  std::vector<StateId> pattern_state;

  std::size_t size() const { return states.size(); }
  std::size_t transition_count() const;
};

/// Breadth-first exploration under every input of `universe`. States are
/// identified by canonical_key without the macro clock. Throws UsageError for
/// probabilistic MAs or an empty universe, ExplosionError past `bound`.
TransitionSystem flatten(const MimicAutomaton& ma, const MimicConfiguration& initial,
                         std::span<const MacroInput> universe, std::size_t bound = kDefaultStateBound);

enum class Verdict { holds, violated, probability };

std::string_view to_string(Verdict v);

struct PathStep {
  std::size_t state;
  std::size_t input;
  std::string label;
};

/// Path from the initial state; `final_state` is the violating/witness state.
struct Counterexample {
  std::vector<PathStep> steps;
  std::size_t final_state = 0;

  std::size_t length() const { return steps.size(); }
};

struct CheckStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t iterations = 0;
  std::size_t trials = 0;
};

struct CheckResult {
  Verdict verdict = Verdict::holds;
  std::optional<Counterexample> counterexample;
  std::optional<double> probability;
  std::string method;
  std::optional<double> error_bound;
  CheckStats stats;
};

/// Holds iff `predicate` is true in every reachable state; otherwise the BFS-shortest counterexample.
CheckResult check_invariant(const TransitionSystem& ts, const Predicate& predicate);
/// Holds (reachable) with a shortest witness, or violated (unreachable).
CheckResult check_reach(const TransitionSystem& ts, const Predicate& predicate);

/// Synchronous product with a monitor. Labels outside the pattern's alphabet,
/// and undefined pattern transitions, leave the pattern state unchanged.
/// Product states carry "accepting" when the pattern state is final.
TransitionSystem product(const TransitionSystem& ts, const SequentialAutomaton& pattern);

/// Violated iff some behavior drives `pattern` into a final state; the
/// counterexample is expressed in `ts` state ids.
CheckResult check_bad_prefix(const TransitionSystem& ts, const SequentialAutomaton& pattern);

// ---------------------------------------------------------------------------
// Probabilistic analysis

/// Input per macro clock: `prefix` first, then `cycle` repeated (the last
/// prefix entry repeats when `cycle` is empty).
struct InputPolicy {
  std::vector<MacroInput> prefix;
  std::vector<MacroInput> cycle;

  static InputPolicy constant(MacroInput input) { return {{}, {std::move(input)}}; }
  const MacroInput& at(std::size_t clock) const;
  /// Distinct positions of the policy; clocks with equal phase see the same future inputs.
  std::size_t phase(std::size_t clock) const;
};

struct Dtmc {
  std::vector<MimicConfiguration> states;
  std::vector<std::size_t> phase;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<std::set<std::string>> props;
  std::size_t initial = 0;

  std::size_t size() const { return states.size(); }
};

/// Row sums within kProbabilityTolerance and successors in range.
ValidationReport validate(const Dtmc& dtmc);

/// Exact successor distribution of one macro tick, enumerating every random
/// choice. Throws SizeLimitError past `cap` branches.
std::vector<std::pair<MimicConfiguration, double>> macro_step_distribution(const MimicAutomaton& ma,
                                                                          const MimicConfiguration& cfg,
                                                                          const MacroInput& input,
                                                                          std::size_t cap = kDefaultSuccessorCap);

Dtmc build_dtmc(const MimicAutomaton& ma, const MimicConfiguration& initial, const InputPolicy& policy,
                std::size_t bound = kDefaultStateBound, std::size_t cap = kDefaultSuccessorCap);

/// x'(s) = 1 on target states, sum_t P(s,t) x(t) elsewhere.
std::vector<double> value_iteration_step(const Dtmc& dtmc, const std::vector<bool>& target,
                                         const std::vector<double>& x);

/// Unbounded reachability: iterate from the target indicator until the
/// max-norm change drops below `tol`. Throws ConvergenceError.
CheckResult reach_probability_exact(const Dtmc& dtmc, const Predicate& target, double tol = kDefaultTolerance,
                                    std::size_t max_iter = kDefaultMaxIterations);
/// Probability of reaching `target` within `steps` ticks.
CheckResult reach_probability_bounded(const Dtmc& dtmc, const Predicate& target, std::size_t steps);

/// Trials are grouped in blocks of kTrialBlock; block b draws its trials in
/// order from one stream seeded with derive_seed(seed, b). Workers take whole
/// blocks, so the estimate does not depend on `workers`.
inline constexpr std::size_t kTrialBlock = 1024;

/// Fraction of sampled runs (at most `horizon` ticks) that hit `target`, with
/// the 95% normal-approximation half-width.
CheckResult reach_probability_mc(const MimicAutomaton& ma, const MimicConfiguration& initial,
                                 const InputPolicy& policy, const Predicate& target, std::size_t horizon,
                                 std::size_t trials, std::uint64_t seed, std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Properties

enum class PropertyKind { invariant, reach, bad_prefix, probability };
enum class ProbabilityMethod { exact, monte_carlo };

std::string_view to_string(PropertyKind k);
std::string_view to_string(ProbabilityMethod m);

struct Property {
  std::string name;
  PropertyKind kind = PropertyKind::invariant;
  std::string predicate;  // invariant, reach, probability
  std::string pattern;    // bad_prefix: SA name
  /// probability: bounded horizon; unbounded when absent (exact only).
  std::optional<std::size_t> steps;
  ProbabilityMethod method = ProbabilityMethod::exact;
  /// probability: holds iff p >= threshold.
  std::optional<double> threshold;

  friend bool operator==(const Property&, const Property&) = default;
};

}  // namespace mimic

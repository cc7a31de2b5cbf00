#pragma once

// The mimic automaton: hierarchical, sequential and (probabilistic) cellular
// automata tied together by SA<->CA bindings.
//
//   sa_from_ca  one CA step per macro tick; before it, every cell's hosted unit
//               runs to completion on the tick's input block while the lattice
//               is held fixed.
//   ca_from_sa  one outer SA step per macro tick; its input symbol is read off
//               the final lattice of a complete inner CA run.
//
// Bindings nest through their units (a cell may host another binding), so the
// two modes can call each other up to `max_depth` levels. The macro clock of a
// configuration counts ticks of the binding that owns it.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mimic/automata.hpp"
#include "mimic/voting.hpp"

namespace mimic {

using Scheduler = std::variant<CellularAutomaton, ProbabilisticCellularAutomaton>;

const LatticeShape& shape_of(const Scheduler& s);
const std::string& name_of(const Scheduler& s);
bool is_probabilistic(const Scheduler& s);
ValidationReport validate(const Scheduler& s);

/// One global-map step; a PCA needs `chooser` (UsageError otherwise).
Lattice scheduler_step(const Scheduler& s, const Lattice& lattice, Chooser* chooser);
CaRun scheduler_run(const Scheduler& s, const Lattice& lattice, std::size_t t_max, Chooser* chooser);

enum class BindingMode { sa_from_ca, ca_from_sa };

std::string_view to_string(BindingMode m);

struct PlainSaUnit {
  std::string sa;
  friend bool operator==(const PlainSaUnit&, const PlainSaUnit&) = default;
};

/// `path` is reserved; only the empty path (the whole HA) is accepted.
struct HaUnit {
  std::string ha;
  std::string path;
  friend bool operator==(const HaUnit&, const HaUnit&) = default;
};

struct NestedUnit {
  std::string binding;
  friend bool operator==(const NestedUnit&, const NestedUnit&) = default;
};

/// Nested bindings run in sequence; each stage's output word is the next
/// stage's input block. A stage that abstains or gets stuck ends the chain.
struct PipelineUnit {
  std::vector<std::string> stages;
  friend bool operator==(const PipelineUnit&, const PipelineUnit&) = default;
};

using Unit = std::variant<PlainSaUnit, HaUnit, NestedUnit, PipelineUnit>;

struct ReadoutTable {
  std::map<Lattice, std::string> entries;
  std::optional<std::string> fallback;
  friend bool operator==(const ReadoutTable&, const ReadoutTable&) = default;
};

/// The name of cell `cell`'s state.
struct ReadoutCell {
  std::size_t cell = 0;
  friend bool operator==(const ReadoutCell&, const ReadoutCell&) = default;
};

/// `odd` when an odd number of cells hold a state other than the first of Q.
struct ReadoutParity {
  std::string even = "0";
  std::string odd = "1";
  friend bool operator==(const ReadoutParity&, const ReadoutParity&) = default;
};

using Readout = std::variant<ReadoutTable, ReadoutCell, ReadoutParity>;

std::optional<std::string> apply_readout(const Readout& r, const LatticeShape& shape, const Lattice& lattice);

struct Binding {
  std::string name;
  BindingMode mode = BindingMode::sa_from_ca;
  std::string ca;
  /// sa_from_ca: the unit hosted by a cell in each state of Q.
  std::vector<Unit> cell_map;
  /// Start lattice when the binding runs nested; defaults to the first state of Q everywhere.
  std::optional<Lattice> initial;
  /// sa_from_ca: when set, the observed output of a tick is the vote over the cells.
  std::optional<VoterPolicy> voter;
  /// ca_from_sa: the outer SA and how a final lattice becomes its input symbol.
  std::string outer_sa;
  Readout readout;
  /// ca_from_sa when nested: inner start lattice selected by each input symbol.
  std::map<std::string, Lattice> seeds;
  /// Cap for the inner final(Phi) run.
  std::size_t t_max = kDefaultRunCap;

  friend bool operator==(const Binding&, const Binding&) = default;
};

inline constexpr std::size_t kDefaultMaxDepth = 4;

/// A_HA, A_SA and A_CA keyed by name (gamma lives inside each HA), the
/// SA<->CA bindings and the root binding that drives a run. The set C of HA
/// configurations is the set of legal `HaConfiguration`s of each HA.
struct MimicAutomaton {
  std::string name;
  std::map<std::string, HierarchicalAutomaton> has;
  std::map<std::string, SequentialAutomaton> sas;
  std::map<std::string, Scheduler> cas;
  std::map<std::string, Binding> bindings;
  std::string root_binding;
  std::size_t max_depth = kDefaultMaxDepth;
  std::map<std::string, std::string> metadata;

  const Binding& binding(std::string_view name) const;
  const Binding& root() const { return binding(root_binding); }
  const Scheduler& scheduler(const Binding& b) const;
  BindingMode mode() const { return root().mode; }
  bool deterministic() const;

  friend bool operator==(const MimicAutomaton&, const MimicAutomaton&) = default;
};

/// Static checks: every component automaton, reference resolution, cell map
/// and readout totality, voter quorum, and nesting acyclicity within max_depth.
ValidationReport validate(const MimicAutomaton& ma);

// ---------------------------------------------------------------------------
// Run-time state

struct MimicConfiguration;

struct SaUnitState {
  StateId state = 0;
  friend bool operator==(const SaUnitState&, const SaUnitState&) = default;
};

/// One configuration per nested binding (a pipeline holds one per stage).
struct NestedUnitState {
  std::vector<MimicConfiguration> stages;
};

using UnitState = std::variant<SaUnitState, HaConfiguration, NestedUnitState>;

struct MimicConfiguration {
  /// sa_from_ca: the lattice the hosted units live on. ca_from_sa: the last
  /// final inner lattice (the start lattice before the first tick).
  Lattice lattice;
  /// sa_from_ca: one entry per cell.
  std::vector<UnitState> units;
  /// ca_from_sa: the outer SA's state.
  StateId outer_state = 0;
  std::size_t macro_clock = 0;
};

bool operator==(const NestedUnitState& a, const NestedUnitState& b);
bool operator==(const MimicConfiguration& a, const MimicConfiguration& b);

/// Root input per tick: an input block (sa_from_ca) or an inner start lattice (ca_from_sa).
using MacroInput = std::variant<Word, Lattice>;

struct TickRecord;

struct CellRun {
  RunResult result;
  bool abstained = false;
  std::vector<TickRecord> nested;  // ticks of nested bindings, in execution order
};

struct TickRecord {
  std::string binding;
  MacroInput input;
  Lattice lattice_before;
  Lattice lattice_after;
  // sa_from_ca
  std::vector<CellRun> cells;
  std::optional<VoteOutcome> vote;
  // ca_from_sa
  std::vector<Lattice> inner_trace;
  Termination inner_termination = Termination::step_cap;
  std::string readout_symbol;
  StateId outer_before = 0;
  StateId outer_after = 0;
  std::string outer_output;
  bool stuck = false;
  /// Global-map applications and outer SA steps performed at this binding level.
  std::size_t scheduler_steps = 0;
  std::size_t outer_steps = 0;
};

bool operator==(const CellRun& a, const CellRun& b);
bool operator==(const TickRecord& a, const TickRecord& b);

using MacroTrace = std::vector<TickRecord>;

/// Output seen from outside a tick: the vote (nullopt on abstention) when the
/// binding has a voter, otherwise every cell's word concatenated in cell
/// order; for ca_from_sa the outer step's output symbol.
std::optional<Word> observed_output(const Binding& b, const TickRecord& tick);

/// Hooks for instrumented runs.
class MacroObserver {
 public:
  virtual ~MacroObserver() = default;
  /// Before a hosted unit consumes one symbol; `host` is its binding's lattice.
  virtual void unit_symbol(std::size_t /*depth*/, std::size_t /*cell*/, const Lattice& /*host*/) {}
  virtual void scheduler_step(std::size_t /*depth*/, const Lattice& /*before*/, const Lattice& /*after*/) {}
  virtual void outer_step(std::size_t /*depth*/, StateId /*from*/, StateId /*to*/) {}
};

struct StepContext {
  Chooser* chooser = nullptr;  // required once a PCA is stepped
  MacroObserver* observer = nullptr;
};

MimicConfiguration ma_initial(const MimicAutomaton& ma, const Lattice& lattice0);

struct MacroStep {
  MimicConfiguration config;
  TickRecord tick;
};

MacroStep ma_macro_step_sa_from_ca(const MimicAutomaton& ma, const MimicConfiguration& cfg, const Word& input_block,
                                   StepContext ctx = {});
/// Throws StuckError when the outer SA has no transition on the read-out symbol.
MacroStep ma_macro_step_ca_from_sa(const MimicAutomaton& ma, const MimicConfiguration& cfg,
                                   const Lattice& inner_lattice0, StepContext ctx = {});
/// Dispatches on the root binding's mode; UsageError when `input` has the wrong kind.
MacroStep ma_macro_step(const MimicAutomaton& ma, const MimicConfiguration& cfg, const MacroInput& input,
                        StepContext ctx = {});

/// In-place tick without building a record; returns the observed output.
std::optional<Word> ma_advance(const MimicAutomaton& ma, MimicConfiguration& cfg, const MacroInput& input,
                               StepContext ctx = {});

struct MaRun {
  MimicConfiguration config;
  MacroTrace trace;
};

MaRun ma_run(const MimicAutomaton& ma, const MimicConfiguration& cfg, std::span<const MacroInput> schedule,
             StepContext ctx = {});
MaRun ma_run(const MimicAutomaton& ma, const MimicConfiguration& cfg, std::span<const MacroInput> schedule,
             RandomStream& rng);

/// Structural serialization used for state hashing. Macro clocks (nested ones
/// included) appear only with `include_clock`; they never influence behavior.
std::string canonical_key(const MimicConfiguration& cfg, bool include_clock = false);

std::string render_lattice(const LatticeShape& shape, const Lattice& lattice);
std::string render_word(const Word& w);
/// Human-readable view of a root configuration.
std::string describe(const MimicAutomaton& ma, const MimicConfiguration& cfg);

}  // namespace mimic

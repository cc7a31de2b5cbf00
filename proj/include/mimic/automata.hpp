#pragma once

// Component automata: sequential (Mealy, with final states), 1-D cellular,
// probabilistic cellular and hierarchical (state-refinement trees).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mimic/error.hpp"
#include "mimic/random.hpp"

namespace mimic {

using StateId = std::size_t;
using SymbolId = std::size_t;
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// A sequence of symbol names (input word, output word, input block).
using Word = std::vector<std::string>;

std::size_t index_of(const std::vector<std::string>& names, std::string_view name);

// ---------------------------------------------------------------------------
// Sequential automata

struct SequentialAutomaton {
  std::string name;
  std::vector<std::string> states;
  StateId initial = 0;
  std::vector<StateId> finals;  // sorted, unique
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  /// Relaxed mode: undefined (state, symbol) entries are allowed and a run
  /// that reaches one gets stuck instead of failing validation.
  bool partial = false;
  /// Row-major over (state, input); `npos` marks an undefined entry.
  std::vector<StateId> next;
  std::vector<SymbolId> out;

  std::size_t state_index(std::string_view s) const { return index_of(states, s); }
  std::size_t input_index(std::string_view a) const { return index_of(inputs, a); }
  std::size_t output_index(std::string_view o) const { return index_of(outputs, o); }
  bool is_final(StateId s) const;
  std::size_t slot(StateId s, SymbolId a) const { return s * inputs.size() + a; }

  friend bool operator==(const SequentialAutomaton&, const SequentialAutomaton&) = default;
};

/// Name-based construction. `build()` validates and throws ValidationError;
/// `build_unchecked()` keeps defects so they can be reported by `validate`.
class SaBuilder {
 public:
  explicit SaBuilder(std::string name);
  SaBuilder& states(std::vector<std::string> s);
  SaBuilder& initial(std::string s);
  SaBuilder& finals(std::vector<std::string> f);
  SaBuilder& inputs(std::vector<std::string> a);
  SaBuilder& outputs(std::vector<std::string> o);
  SaBuilder& partial(bool p = true);
  /// Omitted output emits the target state's name.
  SaBuilder& on(std::string from, std::string symbol, std::string to, std::optional<std::string> output = std::nullopt);

  SequentialAutomaton build() const;
  SequentialAutomaton build_unchecked() const;

 private:
  struct Edge {
    std::string from, symbol, to;
    std::optional<std::string> output;
  };
  std::string name_;
  std::vector<std::string> states_, finals_, inputs_;
  std::optional<std::vector<std::string>> outputs_;
  std::string initial_;
  bool partial_ = false;
  std::vector<Edge> edges_;
};

struct SaStep {
  StateId state;
  SymbolId output;
};

struct RunResult {
  std::string final_state;
  bool accepted = false;
  Word output_word;
  std::size_t steps = 0;
  /// The run stopped early on an undefined transition (relaxed mode).
  bool stuck = false;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Throws StuckError when the entry is undefined and std::out_of_range for
/// indices outside the automaton.
SaStep sa_step(const SequentialAutomaton& sa, StateId state, SymbolId symbol);
std::pair<std::string, std::string> sa_step(const SequentialAutomaton& sa, std::string_view state,
                                            std::string_view symbol);

/// final(delta): folds sa_step from `sa.initial`.
RunResult sa_run(const SequentialAutomaton& sa, std::span<const std::string> input);
/// Same fold from an arbitrary state; `state` is updated in place.
RunResult sa_run_from(const SequentialAutomaton& sa, StateId& state, std::span<const std::string> input,
                      std::optional<std::size_t> cell = std::nullopt);

// ---------------------------------------------------------------------------
// Cellular automata

using CellValue = std::uint32_t;
/// Cell values index into the owning automaton's `cell_states`.
using Lattice = std::vector<CellValue>;

enum class BoundaryKind { periodic, fixed };

struct Boundary {
  BoundaryKind kind = BoundaryKind::periodic;
  CellValue value = 0;  // used by fixed boundaries only

  friend bool operator==(const Boundary&, const Boundary&) = default;
};

/// How a rule table was specified; built-ins are expanded into the table.
enum class RuleForm { table, xor_rule, identity, majority, constant };

std::string_view to_string(RuleForm f);
std::optional<RuleForm> rule_form_from(std::string_view s);

struct LatticeShape {
  std::vector<std::string> cell_states;
  std::size_t width = 1;
  std::size_t radius = 1;
  Boundary boundary;

  std::size_t arity() const { return 2 * radius + 1; }
  /// |Q|^(2r+1), or npos when that overflows the table cap.
  std::size_t neighborhood_count() const;
  /// Base-|Q| code of the neighborhood of `cell`, leftmost neighbor most significant.
  std::size_t neighborhood_code(const Lattice& lattice, std::size_t cell) const;
  std::vector<CellValue> decode_neighborhood(std::size_t code) const;
  std::size_t cell_index(std::string_view q) const { return index_of(cell_states, q); }
  void check_lattice(const Lattice& lattice) const;  // throws DimensionError

  friend bool operator==(const LatticeShape&, const LatticeShape&) = default;
};

/// Largest rule table a CA or PCA may declare.
inline constexpr std::size_t kMaxRuleTable = std::size_t{1} << 20;

struct CellularAutomaton {
  std::string name;
  LatticeShape shape;
  std::vector<CellValue> rule;  // indexed by neighborhood code
  RuleForm form = RuleForm::table;

  friend bool operator==(const CellularAutomaton&, const CellularAutomaton&) = default;
};

/// Table for a built-in deterministic rule:
///   xor      - sum of the non-center neighbors mod |Q| (left xor right for r=1, Q={0,1})
///   identity - the center cell
///   majority - most frequent value; ties keep the center if tied, else the smallest value
std::vector<CellValue> builtin_rule_table(const LatticeShape& shape, RuleForm form);
CellularAutomaton make_ca(std::string name, LatticeShape shape, RuleForm form);

Lattice ca_step(const CellularAutomaton& ca, const Lattice& lattice);

enum class Termination { fixpoint, step_cap };
std::string_view to_string(Termination t);

struct CaRun {
  std::vector<Lattice> trace;  // starts with the initial lattice
  Termination terminated_by = Termination::step_cap;
};

inline constexpr std::size_t kDefaultRunCap = 1000;

/// final(Phi): steps until Phi(x) = x (not appended again) or `t_max` steps.
CaRun ca_run(const CellularAutomaton& ca, const Lattice& lattice, std::size_t t_max = kDefaultRunCap);

// ---------------------------------------------------------------------------
// Probabilistic cellular automata

using Distribution = std::vector<std::pair<CellValue, double>>;

inline constexpr double kProbabilityTolerance = 1e-9;

struct ProbabilisticCellularAutomaton {
  std::string name;
  LatticeShape shape;
  std::vector<Distribution> rule;  // indexed by neighborhood code
  RuleForm form = RuleForm::table;

  friend bool operator==(const ProbabilisticCellularAutomaton&, const ProbabilisticCellularAutomaton&) = default;
};

ProbabilisticCellularAutomaton point_mass(const CellularAutomaton& ca);
/// Same distribution from every neighborhood.
ProbabilisticCellularAutomaton make_constant_pca(std::string name, LatticeShape shape, Distribution d);

/// Source of random choices. Sampling draws from a stream; the exact DTMC
/// builder enumerates every branch through the same interface.
class Chooser {
 public:
  virtual ~Chooser() = default;
  /// Index into `d` of the chosen entry.
  virtual std::size_t choose(const Distribution& d) = 0;
};

/// Consumes exactly one uniform01 draw per choice; picks the first entry whose
/// cumulative probability exceeds the draw.
class SamplingChooser final : public Chooser {
 public:
  explicit SamplingChooser(RandomStream& rng) : rng_(&rng) {}
  std::size_t choose(const Distribution& d) override;

 private:
  RandomStream* rng_;
};

/// Cells are sampled left to right, one choice each.
Lattice pca_step(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, Chooser& chooser);
Lattice pca_step(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, RandomStream& rng);

inline constexpr std::size_t kDefaultSuccessorCap = 4096;

/// Exact one-step distribution. Throws SizeLimitError when the number of
/// successor combinations exceeds `cap`.
std::map<Lattice, double> pca_step_distribution(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice,
                                                std::size_t cap = kDefaultSuccessorCap);

/// Fixpoint-or-cap run where a fixpoint means the sampled successor equals the current lattice.
CaRun pca_run(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, std::size_t t_max, Chooser& chooser);

// ---------------------------------------------------------------------------
// Hierarchical automata

struct HierarchicalAutomaton {
  std::string name;
  std::vector<SequentialAutomaton> sas;
  std::size_t root = 0;
  /// Composition functions: (sa, state) refined by the listed SAs.
  std::map<std::pair<std::size_t, StateId>, std::vector<std::size_t>> gamma;

  std::size_t sa_index(std::string_view sa_name) const;
  const std::vector<std::size_t>& refinements(std::size_t sa, StateId state) const;
  /// Parent SA of each SA (npos for the root); assumes the tree invariant.
  std::vector<std::size_t> parents() const;
  std::vector<std::size_t> depths() const;

  friend bool operator==(const HierarchicalAutomaton&, const HierarchicalAutomaton&) = default;
};

/// Active SAs and their current states.
struct HaConfiguration {
  std::map<std::size_t, StateId> active;

  friend bool operator==(const HaConfiguration&, const HaConfiguration&) = default;
  friend auto operator<=>(const HaConfiguration&, const HaConfiguration&) = default;
};

struct HaFiring {
  std::size_t sa;
  StateId from;
  StateId to;
  SymbolId output;
};

struct HaStep {
  HaConfiguration config;
  std::vector<HaFiring> fired;  // ascending SA index
};

HaConfiguration ha_initial(const HierarchicalAutomaton& ha);

/// Outermost-first: the shallowest depth holding an enabled active SA fires
/// every enabled active SA at that depth. A state change drops the old
/// state's descendants and enters the new state's refinements at their
/// initial states. Throws InputRejected when no SA knows `symbol`, StuckError
/// when no active SA is enabled.
HaStep ha_step(const HierarchicalAutomaton& ha, const HaConfiguration& config, std::string_view symbol);

/// HaConfiguration invariants against `ha`; empty when legal.
ValidationReport check_configuration(const HierarchicalAutomaton& ha, const HaConfiguration& config);

// ---------------------------------------------------------------------------
// Validation (violations are data, not errors)

ValidationReport validate(const SequentialAutomaton& sa);
ValidationReport validate(const CellularAutomaton& ca);
ValidationReport validate(const ProbabilisticCellularAutomaton& pca);
ValidationReport validate(const HierarchicalAutomaton& ha);

}  // namespace mimic

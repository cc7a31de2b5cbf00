#pragma once

// Dynamical heterogeneous redundant (DHR) structures as mimic automata:
// each lattice cell is an execution body (slot), the cell state selects the
// executor variant it hosts, the CA rule is the scheduler, and a voter
// arbitrates the slots' output words.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimic/composition.hpp"

namespace mimic {

struct DhrStructure {
  std::string name;
  /// Heterogeneous variants, indexed by the scheduler's cell states.
  std::vector<SequentialAutomaton> executors;
  Scheduler scheduler;
  VoterPolicy voter;
  Lattice initial_lattice;

  std::size_t width() const { return shape_of(scheduler).width; }
  friend bool operator==(const DhrStructure&, const DhrStructure&) = default;
};

ValidationReport validate(const DhrStructure& d);

struct DhrStepReport {
  Word input_block;
  std::vector<Word> per_slot_outputs;
  std::optional<Word> voted_output;  // nullopt = abstain
  std::vector<std::size_t> dissenters;
  Lattice lattice_before;
  Lattice lattice_after;

  friend bool operator==(const DhrStepReport&, const DhrStepReport&) = default;
};

/// sa_from_ca mimic automaton with cell_map(q) = executors[q], the scheduler
/// as root CA and the voter on the root binding. Throws ValidationError.
MimicAutomaton build_dhr(const DhrStructure& d);

MimicConfiguration dhr_initial(const MimicAutomaton& dhr_ma, const DhrStructure& d);

DhrStepReport report_from_tick(const TickRecord& tick);

/// One macro tick of `build_dhr(d)` plus its vote.
std::pair<MimicConfiguration, DhrStepReport> dhr_step(const MimicAutomaton& dhr_ma, const MimicConfiguration& state,
                                                      const Word& input_block, Chooser* chooser = nullptr);
std::pair<MimicConfiguration, DhrStepReport> dhr_step(const DhrStructure& d, const MimicConfiguration& state,
                                                      const Word& input_block, Chooser* chooser = nullptr);

/// Routes `slot`'s current variant to `faulty` for that slot only. Q gains a
/// fresh state that the scheduler treats exactly like the replaced variant;
/// it stays in place while the scheduler keeps the slot on that variant.
DhrStructure inject_fault(const DhrStructure& d, std::size_t slot, const SequentialAutomaton& faulty);

std::vector<DhrStepReport> dhr_run(const DhrStructure& d, std::span<const Word> schedule, std::uint64_t seed = 0);

struct SerialDhr {
  std::string name;
  std::vector<DhrStructure> stages;
  friend bool operator==(const SerialDhr&, const SerialDhr&) = default;
};

ValidationReport validate(const SerialDhr& s);

/// Three nesting levels: a one-cell sequencer binding whose cell hosts a
/// pipeline over the stages' DHR bindings, whose cells host the executors.
/// Stage i's voted word is stage i+1's input block.
MimicAutomaton compose_serial(const SerialDhr& s);

struct SerialStepReport {
  Word input_block;
  std::vector<DhrStepReport> stages;  // stages that ran, in order
  std::optional<Word> output;         // last stage's vote; nullopt when a stage abstained
};

struct SerialRun {
  std::vector<SerialStepReport> steps;
  /// A stage abstained; the run stopped after that step.
  bool aborted = false;
};

SerialRun dhr_run(const SerialDhr& s, std::span<const Word> schedule, std::uint64_t seed = 0);

}  // namespace mimic

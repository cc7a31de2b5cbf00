#include <algorithm>
#include <set>

#include "mimic/dhr.hpp"

namespace mimic {

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

template <class Map, class T>
void merge_into(Map& target, const std::string& key, const T& value, const std::string& what) {
  auto [it, inserted] = target.emplace(key, value);
  if (!inserted && !(it->second == value)) {
    throw ValidationError({{"unique_names", key, "two different " + what + "s share this name"}});
  }
}

}  // namespace

ValidationReport validate(const DhrStructure& d) {
  ValidationReport report;
  for (auto v : validate(d.scheduler)) report.push_back(std::move(v));
  for (const auto& e : d.executors) {
    for (auto v : validate(e)) report.push_back(std::move(v));
  }
  const auto& shape = shape_of(d.scheduler);
  if (d.executors.size() != shape.cell_states.size()) {
    report.push_back({"executor_count", d.name,
                      std::to_string(d.executors.size()) + " executors for " +
                          std::to_string(shape.cell_states.size()) + " scheduler states"});
  }
  if (!d.executors.empty()) {
    const auto in = as_set(d.executors.front().inputs);
    const auto out = as_set(d.executors.front().outputs);
    for (const auto& e : d.executors) {
      if (as_set(e.inputs) != in || as_set(e.outputs) != out) {
        report.push_back({"shared_alphabet", d.name + "." + e.name, "executor alphabets differ"});
      }
    }
  }
  const auto q = d.voter.effective_quorum(shape.width);
  if (q < 1 || q > shape.width) report.push_back({"quorum", d.name, "quorum outside [1, width]"});
  if (d.initial_lattice.size() != shape.width ||
      std::any_of(d.initial_lattice.begin(), d.initial_lattice.end(),
                  [&](CellValue v) { return v >= shape.cell_states.size(); })) {
    report.push_back({"initial_lattice", d.name, "initial lattice does not fit the scheduler"});
  }
  return report;
}

MimicAutomaton build_dhr(const DhrStructure& d) {
  if (auto report = validate(d); !report.empty()) throw ValidationError(std::move(report));
  MimicAutomaton ma;
  ma.name = d.name;
  Binding b;
  b.name = d.name;
  b.mode = BindingMode::sa_from_ca;
  b.ca = name_of(d.scheduler);
  b.initial = d.initial_lattice;
  b.voter = d.voter;
  for (const auto& e : d.executors) {
    merge_into(ma.sas, e.name, e, "executor");
    b.cell_map.push_back(PlainSaUnit{e.name});
  }
  ma.cas.emplace(b.ca, d.scheduler);
  ma.bindings.emplace(b.name, std::move(b));
  ma.root_binding = d.name;
  ma.metadata = {
      {"dhr.cell", "execution body (one redundant slot)"},
      {"dhr.cell_state", "executor variant hosted by the slot"},
      {"dhr.rule", "scheduling algorithm (dynamic reconstruction)"},
      {"dhr.input", "input block fanned out to every slot"},
      {"dhr.output", "voted output word of the slots"},
  };
  return ma;
}

MimicConfiguration dhr_initial(const MimicAutomaton& dhr_ma, const DhrStructure& d) {
  return ma_initial(dhr_ma, d.initial_lattice);
}

DhrStepReport report_from_tick(const TickRecord& tick) {
  DhrStepReport r;
  if (const auto* w = std::get_if<Word>(&tick.input)) r.input_block = *w;
  for (const auto& c : tick.cells) r.per_slot_outputs.push_back(c.result.output_word);
  if (tick.vote) {
    r.voted_output = tick.vote->voted;
    r.dissenters = tick.vote->dissenters;
  }
  r.lattice_before = tick.lattice_before;
  r.lattice_after = tick.lattice_after;
  return r;
}

std::pair<MimicConfiguration, DhrStepReport> dhr_step(const MimicAutomaton& dhr_ma, const MimicConfiguration& state,
                                                      const Word& input_block, Chooser* chooser) {
  auto step = ma_macro_step_sa_from_ca(dhr_ma, state, input_block, StepContext{chooser, nullptr});
  auto report = report_from_tick(step.tick);
  return {std::move(step.config), std::move(report)};
}

std::pair<MimicConfiguration, DhrStepReport> dhr_step(const DhrStructure& d, const MimicConfiguration& state,
                                                      const Word& input_block, Chooser* chooser) {
  return dhr_step(build_dhr(d), state, input_block, chooser);
}

DhrStructure inject_fault(const DhrStructure& d, std::size_t slot, const SequentialAutomaton& faulty) {
  if (slot >= d.width()) {
    throw UsageError("slot " + std::to_string(slot) + " is outside a DHR of width " + std::to_string(d.width()));
  }
  if (!d.executors.empty() && (as_set(faulty.inputs) != as_set(d.executors.front().inputs) ||
                               as_set(faulty.outputs) != as_set(d.executors.front().outputs))) {
    throw ValidationError({{"shared_alphabet", faulty.name, "faulty executor alphabets differ from the DHR's"}});
  }
  DhrStructure out = d;
  const auto& old_shape = shape_of(d.scheduler);
  const auto replaced = d.initial_lattice.at(slot);
  const auto fresh = static_cast<CellValue>(old_shape.cell_states.size());

  LatticeShape shape = old_shape;
  shape.cell_states.push_back(old_shape.cell_states[replaced] + "!" + faulty.name + "@" + std::to_string(slot));
  const auto count = shape.neighborhood_count();
  if (count == npos) throw SizeLimitError("widened scheduler rule table is too large");
  const auto center = shape.radius;
  // The widened rule is a different CA; keep its name apart from the healthy scheduler's.
  const auto renamed = name_of(d.scheduler) + "!" + faulty.name + "@" + std::to_string(slot);

  // Old-rule code of a widened neighborhood with the fresh state read as the replaced variant.
  auto projected = [&](const std::vector<CellValue>& nb) {
    std::size_t code = 0;
    for (auto v : nb) code = code * old_shape.cell_states.size() + (v == fresh ? replaced : v);
    return code;
  };

  if (const auto* ca = std::get_if<CellularAutomaton>(&d.scheduler)) {
    CellularAutomaton widened{renamed, shape, std::vector<CellValue>(count), RuleForm::table};
    for (std::size_t code = 0; code < count; ++code) {
      const auto nb = shape.decode_neighborhood(code);
      auto r = ca->rule[projected(nb)];
      if (nb[center] == fresh && r == replaced) r = fresh;
      widened.rule[code] = r;
    }
    out.scheduler = std::move(widened);
  } else {
    const auto& pca = std::get<ProbabilisticCellularAutomaton>(d.scheduler);
    ProbabilisticCellularAutomaton widened{renamed, shape, std::vector<Distribution>(count), RuleForm::table};
    for (std::size_t code = 0; code < count; ++code) {
      const auto nb = shape.decode_neighborhood(code);
      auto dist = pca.rule[projected(nb)];
      if (nb[center] == fresh) {
        for (auto& [v, p] : dist) {
          if (v == replaced) v = fresh;
        }
      }
      widened.rule[code] = std::move(dist);
    }
    out.scheduler = std::move(widened);
  }
  out.executors.push_back(faulty);
  out.initial_lattice[slot] = fresh;
  return out;
}

std::vector<DhrStepReport> dhr_run(const DhrStructure& d, std::span<const Word> schedule, std::uint64_t seed) {
  const auto ma = build_dhr(d);
  auto state = dhr_initial(ma, d);
  RandomStream rng(seed);
  SamplingChooser chooser(rng);
  std::vector<DhrStepReport> reports;
  for (const auto& block : schedule) {
    auto [next, report] = dhr_step(ma, state, block, &chooser);
    state = std::move(next);
    reports.push_back(std::move(report));
  }
  return reports;
}

ValidationReport validate(const SerialDhr& s) {
  ValidationReport report;
  if (s.stages.size() < 2) {
    report.push_back({"stage_count", s.name, "a serial DHR needs at least two stages"});
  }
  for (const auto& d : s.stages) {
    for (auto v : validate(d)) report.push_back(std::move(v));
  }
  for (std::size_t i = 0; i + 1 < s.stages.size(); ++i) {
    const auto& a = s.stages[i];
    const auto& b = s.stages[i + 1];
    if (a.executors.empty() || b.executors.empty()) continue;
    if (as_set(a.executors.front().outputs) != as_set(b.executors.front().inputs)) {
      report.push_back({"alphabet_chaining", a.name + " -> " + b.name,
                        "voted output alphabet of a stage must equal the next stage's input alphabet"});
    }
  }
  return report;
}

MimicAutomaton compose_serial(const SerialDhr& s) {
  if (auto report = validate(s); !report.empty()) throw ValidationError(std::move(report));
  MimicAutomaton ma;
  ma.name = s.name;
  PipelineUnit pipeline;
  for (const auto& d : s.stages) {
    auto part = build_dhr(d);
    for (const auto& [n, sa] : part.sas) merge_into(ma.sas, n, sa, "SA");
    for (const auto& [n, ca] : part.cas) merge_into(ma.cas, n, ca, "CA");
    for (const auto& [n, b] : part.bindings) merge_into(ma.bindings, n, b, "binding");
    pipeline.stages.push_back(d.name);
  }
  const auto sequencer = s.name + ".sequencer";
  LatticeShape one_cell{{"pipeline"}, 1, 1, {}};
  merge_into(ma.cas, sequencer, Scheduler{make_ca(sequencer, one_cell, RuleForm::identity)}, "CA");
  Binding root;
  root.name = s.name;
  root.mode = BindingMode::sa_from_ca;
  root.ca = sequencer;
  root.cell_map = {std::move(pipeline)};
  merge_into(ma.bindings, root.name, root, "binding");
  ma.root_binding = s.name;
  ma.metadata = {
      {"serial.level1", "sequencer binding '" + s.name + "' (one cell hosting the stage pipeline)"},
      {"serial.level2", "stage DHR bindings, run in order; each stage's voted word feeds the next"},
      {"serial.level3", "executor SAs hosted by each stage's slots"},
  };
  return ma;
}

SerialRun dhr_run(const SerialDhr& s, std::span<const Word> schedule, std::uint64_t seed) {
  const auto ma = compose_serial(s);
  auto cfg = ma_initial(ma, Lattice{0});
  RandomStream rng(seed);
  SamplingChooser chooser(rng);
  SerialRun run;
  for (const auto& block : schedule) {
    auto step = ma_macro_step_sa_from_ca(ma, cfg, block, StepContext{&chooser, nullptr});
    cfg = std::move(step.config);
    const auto& cell = step.tick.cells.at(0);
    SerialStepReport report;
    report.input_block = block;
    for (const auto& t : cell.nested) report.stages.push_back(report_from_tick(t));
    if (!cell.abstained && !cell.result.stuck) report.output = cell.result.output_word;
    run.steps.push_back(std::move(report));
    if (!run.steps.back().output) {
      run.aborted = true;
      break;
    }
  }
  return run;
}

}  // namespace mimic

#include <algorithm>
#include <functional>
#include <set>

#include "mimic/composition.hpp"

namespace mimic {

// ---------------------------------------------------------------------------
// Schedulers

const LatticeShape& shape_of(const Scheduler& s) {
  return std::visit([](const auto& a) -> const LatticeShape& { return a.shape; }, s);
}

const std::string& name_of(const Scheduler& s) {
  return std::visit([](const auto& a) -> const std::string& { return a.name; }, s);
}

bool is_probabilistic(const Scheduler& s) { return std::holds_alternative<ProbabilisticCellularAutomaton>(s); }

ValidationReport validate(const Scheduler& s) {
  return std::visit([](const auto& a) { return validate(a); }, s);
}

Lattice scheduler_step(const Scheduler& s, const Lattice& lattice, Chooser* chooser) {
  if (const auto* ca = std::get_if<CellularAutomaton>(&s)) return ca_step(*ca, lattice);
  if (chooser == nullptr) throw UsageError("'" + name_of(s) + "' is probabilistic; a random stream is required");
  return pca_step(std::get<ProbabilisticCellularAutomaton>(s), lattice, *chooser);
}

CaRun scheduler_run(const Scheduler& s, const Lattice& lattice, std::size_t t_max, Chooser* chooser) {
  if (const auto* ca = std::get_if<CellularAutomaton>(&s)) return ca_run(*ca, lattice, t_max);
  if (chooser == nullptr) throw UsageError("'" + name_of(s) + "' is probabilistic; a random stream is required");
  return pca_run(std::get<ProbabilisticCellularAutomaton>(s), lattice, t_max, *chooser);
}

std::string_view to_string(BindingMode m) { return m == BindingMode::sa_from_ca ? "sa_from_ca" : "ca_from_sa"; }

std::optional<std::string> apply_readout(const Readout& r, const LatticeShape& shape, const Lattice& lattice) {
  if (const auto* t = std::get_if<ReadoutTable>(&r)) {
    if (auto it = t->entries.find(lattice); it != t->entries.end()) return it->second;
    return t->fallback;
  }
  if (const auto* c = std::get_if<ReadoutCell>(&r)) {
    if (c->cell >= lattice.size()) return std::nullopt;
    return shape.cell_states.at(lattice[c->cell]);
  }
  const auto& p = std::get<ReadoutParity>(r);
  const auto ones = std::count_if(lattice.begin(), lattice.end(), [](CellValue v) { return v != 0; });
  return ones % 2 == 0 ? p.even : p.odd;
}

// ---------------------------------------------------------------------------
// MimicAutomaton

const Binding& MimicAutomaton::binding(std::string_view n) const {
  auto it = bindings.find(std::string(n));
  if (it == bindings.end()) throw UsageError("unknown binding '" + std::string(n) + "'");
  return it->second;
}

const Scheduler& MimicAutomaton::scheduler(const Binding& b) const {
  auto it = cas.find(b.ca);
  if (it == cas.end()) throw UsageError("binding '" + b.name + "' references unknown CA '" + b.ca + "'");
  return it->second;
}

bool MimicAutomaton::deterministic() const {
  return std::none_of(cas.begin(), cas.end(), [](const auto& kv) { return is_probabilistic(kv.second); });
}

namespace {

std::vector<std::string> unit_children(const Unit& u) {
  if (const auto* n = std::get_if<NestedUnit>(&u)) return {n->binding};
  if (const auto* p = std::get_if<PipelineUnit>(&u)) return p->stages;
  return {};
}

void validate_lattice(const LatticeShape& shape, const Lattice& l, const std::string& element, const std::string& what,
                      ValidationReport& report) {
  if (l.size() != shape.width) {
    report.push_back({"lattice_width", element, what + " has " + std::to_string(l.size()) + " cells, expected " +
                                                    std::to_string(shape.width)});
    return;
  }
  for (auto v : l) {
    if (v >= shape.cell_states.size()) {
      report.push_back({"lattice_value", element, what + " holds a value outside Q"});
      return;
    }
  }
}

void validate_readout(const MimicAutomaton& ma, const Binding& b, const LatticeShape& shape, ValidationReport& report) {
  auto outer_it = ma.sas.find(b.outer_sa);
  if (outer_it == ma.sas.end()) {
    report.push_back({"reference", b.name, "outer SA '" + b.outer_sa + "' is not in A_SA"});
    return;
  }
  const auto& outer = outer_it->second;
  auto check_symbol = [&](const std::string& sym) {
    if (outer.input_index(sym) == npos) {
      report.push_back({"readout_target", b.name, "readout symbol '" + sym + "' is not an input of '" + outer.name + "'"});
    }
  };
  if (const auto* t = std::get_if<ReadoutTable>(&b.readout)) {
    for (const auto& [lattice, sym] : t->entries) {
      validate_lattice(shape, lattice, b.name, "readout entry", report);
      check_symbol(sym);
    }
    if (t->fallback) {
      check_symbol(*t->fallback);
      return;
    }
    // Without a fallback every lattice must be listed.
    std::size_t total = 1;
    const auto q = shape.cell_states.size();
    for (std::size_t i = 0; i < shape.width && total <= (1u << 16); ++i) total *= q;
    if (total > (1u << 16)) {
      report.push_back({"readout_total", b.name, "readout table cannot be checked for totality; add a default"});
      return;
    }
    if (t->entries.size() < total) {
      report.push_back({"readout_total", b.name,
                        "readout covers " + std::to_string(t->entries.size()) + " of " + std::to_string(total) +
                            " lattices and has no default"});
    }
  } else if (const auto* c = std::get_if<ReadoutCell>(&b.readout)) {
    if (c->cell >= shape.width) report.push_back({"readout_cell", b.name, "readout cell outside the lattice"});
    for (const auto& q : shape.cell_states) check_symbol(q);
  } else {
    const auto& p = std::get<ReadoutParity>(b.readout);
    check_symbol(p.even);
    check_symbol(p.odd);
  }
}

}  // namespace

ValidationReport validate(const MimicAutomaton& ma) {
  ValidationReport report;
  auto append = [&](ValidationReport r) {
    for (auto& v : r) report.push_back(std::move(v));
  };
  for (const auto& [name, sa] : ma.sas) {
    if (name != sa.name) report.push_back({"name", name, "SA stored under a different name"});
    append(validate(sa));
  }
  for (const auto& [name, ha] : ma.has) append(validate(ha));
  for (const auto& [name, s] : ma.cas) append(validate(s));

  if (!ma.bindings.contains(ma.root_binding)) {
    report.push_back({"root_binding", ma.name, "root binding '" + ma.root_binding + "' is not a binding"});
    return report;
  }

  for (const auto& [name, b] : ma.bindings) {
    auto ca_it = ma.cas.find(b.ca);
    if (ca_it == ma.cas.end()) {
      report.push_back({"reference", name, "CA '" + b.ca + "' is not in A_CA"});
      continue;
    }
    const auto& shape = shape_of(ca_it->second);
    if (b.initial) validate_lattice(shape, *b.initial, name, "initial lattice", report);
    if (b.mode == BindingMode::sa_from_ca) {
      if (b.cell_map.size() != shape.cell_states.size()) {
        report.push_back({"cell_map_total", name,
                          "cell map covers " + std::to_string(b.cell_map.size()) + " of " +
                              std::to_string(shape.cell_states.size()) + " cell states"});
      }
      for (const auto& u : b.cell_map) {
        if (const auto* s = std::get_if<PlainSaUnit>(&u); s && !ma.sas.contains(s->sa)) {
          report.push_back({"reference", name, "SA '" + s->sa + "' is not in A_SA"});
        }
        if (const auto* h = std::get_if<HaUnit>(&u)) {
          if (!ma.has.contains(h->ha)) report.push_back({"reference", name, "HA '" + h->ha + "' is not in A_HA"});
          if (!h->path.empty()) report.push_back({"ha_path", name, "HA unit paths are reserved and must be empty"});
        }
        if (const auto* p = std::get_if<PipelineUnit>(&u); p && p->stages.empty()) {
          report.push_back({"pipeline", name, "pipeline has no stages"});
        }
        for (const auto& child : unit_children(u)) {
          if (!ma.bindings.contains(child)) report.push_back({"reference", name, "binding '" + child + "' is unknown"});
        }
      }
      if (b.voter) {
        const auto q = b.voter->effective_quorum(shape.width);
        if (q < 1 || q > shape.width) {
          report.push_back({"quorum", name, "quorum " + std::to_string(q) + " outside [1, width]"});
        }
      }
    } else {
      validate_readout(ma, b, shape, report);
      for (const auto& [sym, lattice] : b.seeds) validate_lattice(shape, lattice, name, "seed for '" + sym + "'", report);
    }
  }

  // Nesting: acyclic, depth (root = 1) within max_depth. `height` memoizes
  // the longest nesting chain below each binding.
  std::map<std::string, std::size_t> height;
  std::set<std::string> on_path;
  bool cyclic = false;
  std::function<std::size_t(const std::string&)> walk = [&](const std::string& n) -> std::size_t {
    if (auto h = height.find(n); h != height.end()) return h->second;
    auto it = ma.bindings.find(n);
    if (it == ma.bindings.end() || cyclic) return 0;
    if (on_path.contains(n)) {
      cyclic = true;
      report.push_back({"nesting_cycle", n, "binding nests itself"});
      return 0;
    }
    on_path.insert(n);
    std::size_t below = 0;
    if (it->second.mode == BindingMode::sa_from_ca) {
      for (const auto& u : it->second.cell_map) {
        for (const auto& child : unit_children(u)) below = std::max(below, walk(child));
      }
    }
    on_path.erase(n);
    return height[n] = below + 1;
  };
  const auto deepest = walk(ma.root_binding);
  if (!cyclic && deepest > ma.max_depth) {
    report.push_back({"nesting_depth", ma.root_binding,
                      "nesting depth " + std::to_string(deepest) + " exceeds max_depth " +
                          std::to_string(ma.max_depth)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Equality of recursive run-time types

bool operator==(const NestedUnitState& a, const NestedUnitState& b) { return a.stages == b.stages; }

bool operator==(const MimicConfiguration& a, const MimicConfiguration& b) {
  return a.lattice == b.lattice && a.units == b.units && a.outer_state == b.outer_state &&
         a.macro_clock == b.macro_clock;
}

bool operator==(const CellRun& a, const CellRun& b) {
  return a.result == b.result && a.abstained == b.abstained && a.nested == b.nested;
}

bool operator==(const TickRecord& a, const TickRecord& b) {
  return a.binding == b.binding && a.input == b.input && a.lattice_before == b.lattice_before &&
         a.lattice_after == b.lattice_after && a.cells == b.cells && a.vote == b.vote &&
         a.inner_trace == b.inner_trace && a.inner_termination == b.inner_termination &&
         a.readout_symbol == b.readout_symbol && a.outer_before == b.outer_before &&
         a.outer_after == b.outer_after && a.outer_output == b.outer_output && a.stuck == b.stuck &&
         a.scheduler_steps == b.scheduler_steps && a.outer_steps == b.outer_steps;
}

std::optional<Word> observed_output(const Binding& b, const TickRecord& tick) {
  if (b.mode == BindingMode::ca_from_sa) {
    if (tick.stuck) return std::nullopt;
    return Word{tick.outer_output};
  }
  if (b.voter) return tick.vote ? tick.vote->voted : std::nullopt;
  Word all;
  for (const auto& c : tick.cells) all.insert(all.end(), c.result.output_word.begin(), c.result.output_word.end());
  return all;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct Outcome {
  std::optional<Word> output;
  bool accepted = false;
  bool stuck = false;
};

class Runner {
 public:
  Runner(const MimicAutomaton& ma, StepContext ctx) : ma_(ma), ctx_(ctx) {}

  MimicConfiguration init_binding(const Binding& b, std::size_t depth, const Lattice* lattice0) const {
    if (depth > ma_.max_depth) {
      throw NestingError("binding '" + b.name + "' nested at depth " + std::to_string(depth) + " > max_depth " +
                         std::to_string(ma_.max_depth));
    }
    const auto& shape = shape_of(ma_.scheduler(b));
    MimicConfiguration cfg;
    cfg.lattice = lattice0 ? *lattice0 : b.initial ? *b.initial : Lattice(shape.width, 0);
    shape.check_lattice(cfg.lattice);
    if (b.mode == BindingMode::sa_from_ca) {
      cfg.units.reserve(cfg.lattice.size());
      for (auto v : cfg.lattice) cfg.units.push_back(init_unit(b.cell_map.at(v), depth));
    } else {
      cfg.outer_state = sa(b.outer_sa).initial;
    }
    return cfg;
  }

  Outcome advance(const Binding& b, MimicConfiguration& cfg, const MacroInput& input, std::size_t depth,
                  TickRecord* rec) const {
    if (b.mode == BindingMode::sa_from_ca) {
      const auto* block = std::get_if<Word>(&input);
      if (!block) throw UsageError("binding '" + b.name + "' (sa_from_ca) takes input blocks");
      return advance_sa_from_ca(b, cfg, *block, depth, rec);
    }
    const auto* seed = std::get_if<Lattice>(&input);
    if (!seed) throw UsageError("binding '" + b.name + "' (ca_from_sa) takes inner start lattices");
    return advance_ca_from_sa(b, cfg, *seed, depth, rec);
  }

 private:
  const SequentialAutomaton& sa(const std::string& n) const {
    auto it = ma_.sas.find(n);
    if (it == ma_.sas.end()) throw UsageError("unknown SA '" + n + "'");
    return it->second;
  }

  const HierarchicalAutomaton& ha(const std::string& n) const {
    auto it = ma_.has.find(n);
    if (it == ma_.has.end()) throw UsageError("unknown HA '" + n + "'");
    return it->second;
  }

  UnitState init_unit(const Unit& u, std::size_t depth) const {
    if (const auto* s = std::get_if<PlainSaUnit>(&u)) return SaUnitState{sa(s->sa).initial};
    if (const auto* h = std::get_if<HaUnit>(&u)) return ha_initial(ha(h->ha));
    NestedUnitState nested;
    for (const auto& child : unit_children(u)) nested.stages.push_back(init_binding(ma_.binding(child), depth + 1, nullptr));
    return nested;
  }

  void notify_symbol(std::size_t depth, std::size_t cell, const Lattice& host) const {
    if (ctx_.observer) ctx_.observer->unit_symbol(depth, cell, host);
  }

  CellRun run_sa(const SequentialAutomaton& m, SaUnitState& st, const Word& block, std::size_t depth,
                 std::size_t cell, const Lattice& host) const {
    CellRun run;
    auto& r = run.result;
    for (std::size_t i = 0; i < block.size(); ++i) {
      notify_symbol(depth, cell, host);
      const auto a = m.input_index(block[i]);
      if (a == npos) throw InputRejected(block[i], i, cell);
      const auto k = m.slot(st.state, a);
      if (m.next[k] == npos) {
        r.stuck = true;
        break;
      }
      r.output_word.push_back(m.outputs[m.out[k]]);
      st.state = m.next[k];
      ++r.steps;
    }
    r.final_state = m.states[st.state];
    r.accepted = !r.stuck && m.is_final(st.state);
    return run;
  }

  CellRun run_ha(const HierarchicalAutomaton& h, HaConfiguration& st, const Word& block, std::size_t depth,
                 std::size_t cell, const Lattice& host) const {
    CellRun run;
    auto& r = run.result;
    for (std::size_t i = 0; i < block.size(); ++i) {
      notify_symbol(depth, cell, host);
      HaStep step;
      try {
        step = ha_step(h, st, block[i]);
      } catch (const InputRejected&) {
        throw InputRejected(block[i], i, cell);
      } catch (const StuckError&) {
        r.stuck = true;
        break;
      }
      st = std::move(step.config);
      const auto& first = step.fired.front();
      r.output_word.push_back(h.sas[first.sa].outputs[first.output]);
      ++r.steps;
    }
    const auto& root = h.sas[h.root];
    const auto root_state = st.active.at(h.root);
    r.final_state = root.states[root_state];
    r.accepted = !r.stuck && root.is_final(root_state);
    return run;
  }

  CellRun run_nested(const Binding& b, MimicConfiguration& cfg, const Word& block, std::size_t depth,
                     std::size_t cell, const Lattice& host, bool record) const {
    CellRun run;
    auto& r = run.result;
    if (b.mode == BindingMode::sa_from_ca) {
      notify_symbol(depth - 1, cell, host);
      TickRecord tick;
      auto out = advance_sa_from_ca(b, cfg, block, depth, record ? &tick : nullptr);
      if (record) run.nested.push_back(std::move(tick));
      r.steps = block.size();
      r.final_state = render_lattice(shape_of(ma_.scheduler(b)), cfg.lattice);
      if (out.output) {
        r.output_word = std::move(*out.output);
        r.accepted = out.accepted;
      } else {
        run.abstained = true;
      }
      return run;
    }
    const auto& outer = sa(b.outer_sa);
    for (std::size_t i = 0; i < block.size(); ++i) {
      notify_symbol(depth - 1, cell, host);
      auto seed = b.seeds.find(block[i]);
      if (seed == b.seeds.end()) throw InputRejected(block[i], i, cell);
      TickRecord tick;
      auto out = advance_ca_from_sa(b, cfg, seed->second, depth, record ? &tick : nullptr);
      if (record) run.nested.push_back(std::move(tick));
      if (out.stuck) {
        r.stuck = true;
        break;
      }
      r.output_word.push_back(out.output->front());
      ++r.steps;
    }
    r.final_state = outer.states[cfg.outer_state];
    r.accepted = !r.stuck && outer.is_final(cfg.outer_state);
    return run;
  }

  CellRun run_unit(const Unit& u, UnitState& st, const Word& block, std::size_t depth, std::size_t cell,
                   const Lattice& host, bool record) const {
    if (const auto* s = std::get_if<PlainSaUnit>(&u)) {
      return run_sa(sa(s->sa), std::get<SaUnitState>(st), block, depth, cell, host);
    }
    if (const auto* h = std::get_if<HaUnit>(&u)) {
      return run_ha(ha(h->ha), std::get<HaConfiguration>(st), block, depth, cell, host);
    }
    auto& nested = std::get<NestedUnitState>(st);
    if (const auto* n = std::get_if<NestedUnit>(&u)) {
      return run_nested(ma_.binding(n->binding), nested.stages.at(0), block, depth + 1, cell, host, record);
    }
    const auto& stages = std::get<PipelineUnit>(u).stages;
    CellRun run;
    Word current = block;
    bool completed = true;
    bool accepted = true;
    for (std::size_t j = 0; j < stages.size(); ++j) {
      auto sub = run_nested(ma_.binding(stages[j]), nested.stages.at(j), current, depth + 1, cell, host, record);
      for (auto& t : sub.nested) run.nested.push_back(std::move(t));
      if (sub.abstained || sub.result.stuck) {
        run.abstained = sub.abstained;
        run.result.stuck = sub.result.stuck;
        completed = false;
        break;
      }
      accepted = accepted && sub.result.accepted;
      current = std::move(sub.result.output_word);
      run.result.final_state = "stage " + std::to_string(j);
    }
    run.result.steps = block.size();
    if (completed) {
      run.result.output_word = std::move(current);
      run.result.accepted = accepted;
    }
    return run;
  }

  Outcome advance_sa_from_ca(const Binding& b, MimicConfiguration& cfg, const Word& block, std::size_t depth,
                             TickRecord* rec) const {
    const auto& sched = ma_.scheduler(b);
    shape_of(sched).check_lattice(cfg.lattice);
    if (rec) {
      rec->binding = b.name;
      rec->input = block;
      rec->lattice_before = cfg.lattice;
    }
    std::vector<Word> outputs(cfg.lattice.size());
    bool all_accepted = true;
    for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
      auto run = run_unit(b.cell_map.at(cfg.lattice[i]), cfg.units.at(i), block, depth, i, cfg.lattice, rec != nullptr);
      all_accepted = all_accepted && run.result.accepted;
      outputs[i] = run.result.output_word;
      if (rec) rec->cells.push_back(std::move(run));
    }

    Outcome outcome;
    if (b.voter) {
      auto v = vote(*b.voter, outputs);
      outcome.output = v.voted;
      outcome.accepted = v.voted.has_value();
      if (rec) rec->vote = std::move(v);
    } else {
      Word all;
      for (auto& w : outputs) all.insert(all.end(), w.begin(), w.end());
      outcome.output = std::move(all);
      outcome.accepted = all_accepted;
    }

    Lattice next = scheduler_step(sched, cfg.lattice, ctx_.chooser);
    if (ctx_.observer) ctx_.observer->scheduler_step(depth, cfg.lattice, next);
    for (std::size_t i = 0; i < next.size(); ++i) {
      // A rebuilt execution body starts fresh; an unchanged cell keeps its unit state.
      if (next[i] != cfg.lattice[i]) cfg.units[i] = init_unit(b.cell_map.at(next[i]), depth);
    }
    cfg.lattice = std::move(next);
    ++cfg.macro_clock;
    if (rec) {
      rec->lattice_after = cfg.lattice;
      rec->scheduler_steps = 1;
    }
    return outcome;
  }

  Outcome advance_ca_from_sa(const Binding& b, MimicConfiguration& cfg, const Lattice& seed, std::size_t depth,
                             TickRecord* rec) const {
    const auto& sched = ma_.scheduler(b);
    const auto& shape = shape_of(sched);
    shape.check_lattice(seed);
    const auto& outer = sa(b.outer_sa);
    auto run = scheduler_run(sched, seed, b.t_max, ctx_.chooser);
    auto symbol = apply_readout(b.readout, shape, run.trace.back());
    if (!symbol) {
      throw ReadoutError("readout of '" + b.name + "' is undefined on " + render_lattice(shape, run.trace.back()));
    }
    const auto a = outer.input_index(*symbol);
    if (a == npos) throw ReadoutError("readout symbol '" + *symbol + "' is not an input of '" + outer.name + "'");
    if (rec) {
      rec->binding = b.name;
      rec->input = seed;
      rec->lattice_before = cfg.lattice;
      rec->inner_termination = run.terminated_by;
      rec->readout_symbol = *symbol;
      rec->outer_before = cfg.outer_state;
    }
    Outcome outcome;
    const auto k = outer.slot(cfg.outer_state, a);
    if (outer.next[k] == npos) {
      outcome.stuck = true;
      if (rec) {
        rec->stuck = true;
        rec->outer_after = cfg.outer_state;
        rec->lattice_after = cfg.lattice;
        rec->inner_trace = std::move(run.trace);
      }
      return outcome;
    }
    if (ctx_.observer) ctx_.observer->outer_step(depth, cfg.outer_state, outer.next[k]);
    cfg.outer_state = outer.next[k];
    cfg.lattice = run.trace.back();
    ++cfg.macro_clock;
    outcome.output = Word{outer.outputs[outer.out[k]]};
    outcome.accepted = outer.is_final(cfg.outer_state);
    if (rec) {
      rec->outer_after = cfg.outer_state;
      rec->outer_output = outcome.output->front();
      rec->lattice_after = cfg.lattice;
      rec->inner_trace = std::move(run.trace);
      rec->outer_steps = 1;
    }
    return outcome;
  }

  const MimicAutomaton& ma_;
  StepContext ctx_;
};

void require_mode(const MimicAutomaton& ma, BindingMode mode) {
  if (ma.mode() != mode) {
    throw UsageError("root binding '" + ma.root_binding + "' is " + std::string(to_string(ma.mode())));
  }
}

}  // namespace

MimicConfiguration ma_initial(const MimicAutomaton& ma, const Lattice& lattice0) {
  return Runner(ma, {}).init_binding(ma.root(), 1, &lattice0);
}

MacroStep ma_macro_step_sa_from_ca(const MimicAutomaton& ma, const MimicConfiguration& cfg, const Word& input_block,
                                   StepContext ctx) {
  require_mode(ma, BindingMode::sa_from_ca);
  return ma_macro_step(ma, cfg, MacroInput{input_block}, ctx);
}

MacroStep ma_macro_step_ca_from_sa(const MimicAutomaton& ma, const MimicConfiguration& cfg,
                                   const Lattice& inner_lattice0, StepContext ctx) {
  require_mode(ma, BindingMode::ca_from_sa);
  return ma_macro_step(ma, cfg, MacroInput{inner_lattice0}, ctx);
}

MacroStep ma_macro_step(const MimicAutomaton& ma, const MimicConfiguration& cfg, const MacroInput& input,
                        StepContext ctx) {
  MacroStep step{cfg, {}};
  auto out = Runner(ma, ctx).advance(ma.root(), step.config, input, 1, &step.tick);
  if (ma.mode() == BindingMode::ca_from_sa && out.stuck) {
    throw StuckError("outer SA '" + ma.root().outer_sa + "' has no transition on '" + step.tick.readout_symbol + "'");
  }
  return step;
}

std::optional<Word> ma_advance(const MimicAutomaton& ma, MimicConfiguration& cfg, const MacroInput& input,
                               StepContext ctx) {
  auto out = Runner(ma, ctx).advance(ma.root(), cfg, input, 1, nullptr);
  if (ma.mode() == BindingMode::ca_from_sa && out.stuck) {
    throw StuckError("outer SA '" + ma.root().outer_sa + "' is stuck");
  }
  return out.output;
}

MaRun ma_run(const MimicAutomaton& ma, const MimicConfiguration& cfg, std::span<const MacroInput> schedule,
             StepContext ctx) {
  MaRun run{cfg, {}};
  run.trace.reserve(schedule.size());
  for (const auto& input : schedule) {
    auto step = ma_macro_step(ma, run.config, input, ctx);
    run.config = std::move(step.config);
    run.trace.push_back(std::move(step.tick));
  }
  return run;
}

MaRun ma_run(const MimicAutomaton& ma, const MimicConfiguration& cfg, std::span<const MacroInput> schedule,
             RandomStream& rng) {
  SamplingChooser chooser(rng);
  return ma_run(ma, cfg, schedule, StepContext{&chooser, nullptr});
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void write_key(const MimicConfiguration& cfg, bool clock, std::string& out) {
  out += 'L';
  for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(cfg.lattice[i]);
  }
  out += "|U[";
  for (const auto& u : cfg.units) {
    if (const auto* s = std::get_if<SaUnitState>(&u)) {
      out += 's' + std::to_string(s->state);
    } else if (const auto* h = std::get_if<HaConfiguration>(&u)) {
      out += "h{";
      for (const auto& [sa, st] : h->active) out += std::to_string(sa) + ':' + std::to_string(st) + ',';
      out += '}';
    } else {
      out += "n(";
      for (const auto& c : std::get<NestedUnitState>(u).stages) {
        write_key(c, clock, out);
        out += ';';
      }
      out += ')';
    }
    out += ' ';
  }
  out += "]|O" + std::to_string(cfg.outer_state);
  if (clock) out += "|C" + std::to_string(cfg.macro_clock);
}

}  // namespace

std::string canonical_key(const MimicConfiguration& cfg, bool include_clock) {
  std::string out;
  write_key(cfg, include_clock, out);
  return out;
}

std::string render_lattice(const LatticeShape& shape, const Lattice& lattice) {
  std::string s = "[";
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (i) s += ' ';
    s += lattice[i] < shape.cell_states.size() ? shape.cell_states[lattice[i]] : "?";
  }
  return s + "]";
}

std::string render_word(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + w[i];
  return s;
}

namespace {

std::string describe_binding(const MimicAutomaton& ma, const Binding& b, const MimicConfiguration& cfg) {
  const auto& shape = shape_of(ma.scheduler(b));
  std::string s = render_lattice(shape, cfg.lattice);
  if (b.mode == BindingMode::ca_from_sa) {
    const auto& outer = ma.sas.at(b.outer_sa);
    return s + " outer=" + outer.states.at(cfg.outer_state);
  }
  s += " {";
  for (std::size_t i = 0; i < cfg.units.size(); ++i) {
    if (i) s += ", ";
    const auto& u = b.cell_map.at(cfg.lattice.at(i));
    const auto& st = cfg.units[i];
    if (const auto* p = std::get_if<PlainSaUnit>(&u)) {
      s += ma.sas.at(p->sa).states.at(std::get<SaUnitState>(st).state);
    } else if (const auto* h = std::get_if<HaUnit>(&u)) {
      const auto& ha = ma.has.at(h->ha);
      s += h->ha + "(";
      bool first = true;
      for (const auto& [sa, q] : std::get<HaConfiguration>(st).active) {
        s += (first ? "" : " ") + ha.sas[sa].name + "=" + ha.sas[sa].states[q];
        first = false;
      }
      s += ")";
    } else {
      const auto children = unit_children(u);
      const auto& nested = std::get<NestedUnitState>(st).stages;
      s += "<";
      for (std::size_t j = 0; j < children.size(); ++j) {
        s += (j ? " ; " : "") + children[j] + ":" + describe_binding(ma, ma.binding(children[j]), nested.at(j));
      }
      s += ">";
    }
  }
  return s + "}";
}

}  // namespace

std::string describe(const MimicAutomaton& ma, const MimicConfiguration& cfg) {
  return describe_binding(ma, ma.root(), cfg) + " clock=" + std::to_string(cfg.macro_clock);
}

}  // namespace mimic

#include "mimic/report.hpp"

#include <sstream>

#include "mimic/format.hpp"

namespace mimic {

namespace {

/// A state of `ts` seen at macro clock `clock` (flattened states forget the clock).
std::string state_at(const MimicAutomaton& ma, const TransitionSystem& ts, std::size_t s, std::size_t clock) {
  auto cfg = ts.states.at(s);
  cfg.macro_clock = clock;
  return describe(ma, cfg);
}

/// describe() without the clock suffix.
std::string describe_binding_state(const MimicAutomaton& ma, const MimicConfiguration& cfg) {
  auto s = describe(ma, cfg);
  return s.substr(0, s.rfind(" clock="));
}

Json stats_json(const CheckStats& st) {
  return Json{{"states", st.states}, {"transitions", st.transitions}, {"iterations", st.iterations}, {"trials", st.trials}};
}

Json or_null(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

Json counterexample_json(const MimicAutomaton& ma, const TransitionSystem& ts, const Counterexample& cx) {
  Json hops = Json::array();
  for (std::size_t i = 0; i < cx.steps.size(); ++i) {
    const auto& step = cx.steps[i];
    hops.push_back({{"state", state_at(ma, ts, step.state, i)},
                    {"input", render_input(ma, ts.inputs.at(step.input))},
                    {"action", step.label}});
  }
  hops.push_back({{"state", state_at(ma, ts, cx.final_state, cx.steps.size())}});
  return hops;
}

Json check_json(const MimicAutomaton& ma, const TransitionSystem* ts, const CheckResult& r) {
  Json j;
  j["verdict"] = std::string(to_string(r.verdict));
  j["counterexample"] = r.counterexample && ts ? counterexample_json(ma, *ts, *r.counterexample) : Json::array();
  j["probability"] = or_null(r.probability);
  j["error_bound"] = or_null(r.error_bound);
  j["stats"] = stats_json(r.stats);
  j["method"] = r.method;
  j["model"] = ma.name;
  return j;
}

Json detection_json(const MimicAutomaton& ma, const TransitionSystem& ts, const DetectionReport& r) {
  Json j;
  j["verdict"] = r.any() ? "matched" : "clean";
  Json first = Json::array();
  Json matches = Json::array();
  for (const auto& m : r.matches) {
    Json w = m.witness ? counterexample_json(ma, ts, *m.witness) : Json(nullptr);
    if (m.matched && first.empty()) first = w;
    matches.push_back({{"id", m.id}, {"severity", std::string(to_string(m.severity))}, {"matched", m.matched}, {"witness", w}});
  }
  j["counterexample"] = first;
  j["probability"] = nullptr;
  j["error_bound"] = nullptr;
  j["stats"] = stats_json(r.stats);
  j["model"] = r.model;
  j["matches"] = matches;
  j["metadata"] = r.metadata;
  return j;
}

Json trace_json(const MimicAutomaton& ma, const MimicConfiguration& initial, const MacroTrace& trace,
                const MimicConfiguration& final_config) {
  Json steps = Json::array();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    const auto out = observed_output(ma.root(), t);
    Json step{{"clock", i + 1},
              {"input", render_input(ma, t.input)},
              {"action", action_label(out)},
              {"lattice_before", render_lattice(shape_of(ma.scheduler(ma.root())), t.lattice_before)},
              {"lattice_after", render_lattice(shape_of(ma.scheduler(ma.root())), t.lattice_after)},
              {"scheduler_steps", t.scheduler_steps}};
    if (t.vote) {
      Json dis = Json::array();
      for (auto d : t.vote->dissenters) dis.push_back(d);
      step["dissenters"] = dis;
    }
    if (ma.mode() == BindingMode::ca_from_sa) step["readout"] = t.readout_symbol;
    steps.push_back(std::move(step));
  }
  return Json{{"model", ma.name},
              {"initial", describe(ma, initial)},
              {"steps", steps},
              {"final", describe(ma, final_config)},
              {"macro_clock", final_config.macro_clock}};
}

Json diagnostics_json(const std::vector<Diagnostic>& diags) {
  Json arr = Json::array();
  for (const auto& d : diags) {
    arr.push_back({{"file", d.where.file},
                   {"line", d.where.line},
                   {"column", d.where.column},
                   {"kind", std::string(to_string(d.kind))},
                   {"message", d.message},
                   {"hint", d.hint}});
  }
  return arr;
}

std::string check_text(const MimicAutomaton& ma, const TransitionSystem* ts, const CheckResult& r) {
  std::ostringstream os;
  os << "verdict: " << to_string(r.verdict) << " (" << r.method << ")\n";
  if (r.probability) os << "probability: " << *r.probability << "\n";
  if (r.error_bound) os << "error bound: " << *r.error_bound << "\n";
  os << "states: " << r.stats.states << ", transitions: " << r.stats.transitions;
  if (r.stats.iterations) os << ", iterations: " << r.stats.iterations;
  if (r.stats.trials) os << ", trials: " << r.stats.trials;
  os << "\n";
  if (r.counterexample && ts) {
    const auto& cx = *r.counterexample;
    os << (r.verdict == Verdict::holds ? "witness" : "counterexample") << " (length " << cx.length() << "):\n";
    for (std::size_t i = 0; i < cx.steps.size(); ++i) {
      os << "  " << state_at(ma, *ts, cx.steps[i].state, i) << "\n    --" << render_input(ma, ts->inputs[cx.steps[i].input])
         << " / " << cx.steps[i].label << "-->\n";
    }
    os << "  " << state_at(ma, *ts, cx.final_state, cx.steps.size()) << "\n";
  }
  return os.str();
}

std::string detection_text(const MimicAutomaton& ma, const TransitionSystem& ts, const DetectionReport& r) {
  std::ostringstream os;
  os << "model " << r.model << ": " << r.stats.states << " states, " << r.stats.transitions << " transitions\n";
  for (const auto& m : r.matches) {
    os << (m.matched ? "MATCH " : "clean ") << m.id << " [" << to_string(m.severity) << "]";
    if (m.witness) {
      os << " witness:";
      for (const auto& s : m.witness->steps) os << " " << render_input(ma, ts.inputs[s.input]) << "/" << s.label;
    }
    os << "\n";
  }
  return os.str();
}

std::string trace_text(const MimicAutomaton& ma, const MimicConfiguration& initial, const MacroTrace& trace) {
  std::ostringstream os;
  os << "t=0 " << describe(ma, initial) << "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    os << "t=" << i + 1 << " input " << render_input(ma, t.input) << " -> " << action_label(observed_output(ma.root(), t))
       << ", lattice " << render_lattice(shape_of(ma.scheduler(ma.root())), t.lattice_before) << " => "
       << render_lattice(shape_of(ma.scheduler(ma.root())), t.lattice_after) << "\n";
  }
  return os.str();
}

std::string to_dot(const MimicAutomaton& ma, const TransitionSystem& ts) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(ma.name) << "\" {\n  rankdir=LR;\n  init [shape=point];\n";
  for (std::size_t s = 0; s < ts.size(); ++s) {
    os << "  s" << s << " [label=\"" << dot_escape(describe_binding_state(ma, ts.states[s])) << "\"";
    if (ts.props[s].contains("accepting")) os << ", peripheries=2";
    os << "];\n";
  }
  os << "  init -> s" << ts.initial << ";\n";
  for (std::size_t s = 0; s < ts.size(); ++s) {
    for (const auto& e : ts.edges[s]) {
      os << "  s" << s << " -> s" << e.target << " [label=\"" << dot_escape(render_input(ma, ts.inputs[e.input]) + " / " + e.label)
         << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string to_dot(const MimicAutomaton& ma, const Dtmc& dtmc) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(ma.name) << "\" {\n  rankdir=LR;\n  init [shape=point];\n";
  for (std::size_t s = 0; s < dtmc.size(); ++s) {
    os << "  s" << s << " [label=\"" << dot_escape(describe_binding_state(ma, dtmc.states[s])) << " #" << dtmc.phase[s]
       << "\"];\n";
  }
  os << "  init -> s" << dtmc.initial << ";\n";
  for (std::size_t s = 0; s < dtmc.size(); ++s) {
    for (const auto& [t, p] : dtmc.rows[s]) os << "  s" << s << " -> s" << t << " [label=\"" << p << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string raw_rule_dot(const Scheduler& s, std::size_t limit) {
  const auto& shape = shape_of(s);
  const auto q = shape.cell_states.size();
  std::size_t count = 1;
  for (std::size_t i = 0; i < shape.width; ++i) {
    if (count > limit / std::max<std::size_t>(q, 1)) throw SizeLimitError("more than " + std::to_string(limit) + " lattices");
    count *= q;
  }
  auto decode = [&](std::size_t code) {
    Lattice l(shape.width);
    for (std::size_t i = shape.width; i-- > 0;) {
      l[i] = static_cast<CellValue>(code % q);
      code /= q;
    }
    return l;
  };
  auto encode = [&](const Lattice& l) {
    std::size_t code = 0;
    for (auto v : l) code = code * q + v;
    return code;
  };
  std::ostringstream os;
  os << "digraph \"" << dot_escape(name_of(s)) << "\" {\n";
  for (std::size_t c = 0; c < count; ++c) {
    os << "  l" << c << " [label=\"" << dot_escape(render_lattice(shape, decode(c))) << "\"];\n";
  }
  for (std::size_t c = 0; c < count; ++c) {
    const auto l = decode(c);
    if (const auto* ca = std::get_if<CellularAutomaton>(&s)) {
      os << "  l" << c << " -> l" << encode(ca_step(*ca, l)) << ";\n";
    } else {
      for (const auto& [next, p] : pca_step_distribution(std::get<ProbabilisticCellularAutomaton>(s), l)) {
        os << "  l" << c << " -> l" << encode(next) << " [label=\"" << p << "\"];\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace mimic

#include "mimic/checker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <thread>
#include <unordered_map>

namespace mimic {

std::string action_label(const std::optional<Word>& output) {
  return output ? "output(" + render_word(*output) + ")" : "abstain";
}

std::string render_input(const MimicAutomaton& ma, const MacroInput& input) {
  if (const auto* w = std::get_if<Word>(&input)) return "\"" + render_word(*w) + "\"";
  return render_lattice(shape_of(ma.scheduler(ma.root())), std::get<Lattice>(input));
}

ComponentReports check_components(const MimicAutomaton& ma) {
  ComponentReports r;
  auto append = [](ValidationReport& to, ValidationReport from) {
    for (auto& v : from) to.push_back(std::move(v));
  };
  for (const auto& [name, sa] : ma.sas) append(r.sa, validate(sa));
  for (const auto& [name, s] : ma.cas) {
    if (is_probabilistic(s)) {
      append(r.pa, validate(std::get<ProbabilisticCellularAutomaton>(s)));
    } else {
      append(r.ca, validate(std::get<CellularAutomaton>(s)));
    }
  }
  for (const auto& [name, ha] : ma.has) append(r.ha, validate(ha));
  // Component defects are already grouped above; keep only what validate(ma) adds on top.
  const auto whole = validate(ma);
  auto known = [&](const Violation& v) {
    for (const auto* group : {&r.sa, &r.ca, &r.ha, &r.pa}) {
      for (const auto& g : *group) {
        if (g.invariant == v.invariant && g.element == v.element && g.message == v.message) return true;
      }
    }
    return false;
  };
  for (const auto& v : whole) {
    if (!known(v)) r.composition.push_back(v);
  }
  return r;
}

std::size_t TransitionSystem::transition_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

TransitionSystem flatten(const MimicAutomaton& ma, const MimicConfiguration& initial,
                         std::span<const MacroInput> universe, std::size_t bound) {
  if (!ma.deterministic()) {
    throw UsageError("'" + ma.name + "' contains a probabilistic scheduler; build a DTMC instead");
  }
  if (universe.empty()) throw UsageError("input universe is empty");
  if (bound == 0) throw ExplosionError(0, 1);

  TransitionSystem ts;
  ts.inputs.assign(universe.begin(), universe.end());
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](MimicConfiguration cfg) {
    auto key = canonical_key(cfg);
    auto [it, fresh] = index.try_emplace(std::move(key), ts.states.size());
    if (fresh) {
      if (ts.states.size() >= bound) throw ExplosionError(ts.states.size(), 0);
      cfg.macro_clock = 0;
      ts.props.push_back(atomic_props(ma, cfg));
      ts.states.push_back(std::move(cfg));
      ts.edges.emplace_back();
    }
    return it->second;
  };

  ts.initial = intern(initial);
  for (std::size_t s = 0; s < ts.states.size(); ++s) {
    for (std::size_t i = 0; i < ts.inputs.size(); ++i) {
      auto next = ts.states[s];
      std::optional<Word> out;
      try {
        out = ma_advance(ma, next, ts.inputs[i]);
      } catch (const StuckError&) {
        continue;  // the input is not enabled here
      }
      std::size_t target;
      try {
        target = intern(std::move(next));
      } catch (const ExplosionError&) {
        throw ExplosionError(ts.states.size(), ts.states.size() - s);
      }
      ts.edges[s].push_back({i, action_label(out), target});
    }
  }
  return ts;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::probability: return "probability";
  }
  return "?";
}

namespace {

/// Shortest path from the initial state to the first state (in BFS order) satisfying `hit`.
template <class Hit>
std::optional<Counterexample> bfs_find(const TransitionSystem& ts, Hit&& hit) {
  std::vector<std::size_t> parent(ts.size(), npos);
  std::vector<const TsEdge*> via(ts.size(), nullptr);
  std::vector<bool> seen(ts.size(), false);
  std::deque<std::size_t> work{ts.initial};
  seen[ts.initial] = true;
  while (!work.empty()) {
    const auto s = work.front();
    work.pop_front();
    if (hit(s)) {
      Counterexample cx;
      cx.final_state = s;
      for (auto t = s; t != ts.initial; t = parent[t]) {
        cx.steps.push_back({parent[t], via[t]->input, via[t]->label});
      }
      std::reverse(cx.steps.begin(), cx.steps.end());
      return cx;
    }
    for (const auto& e : ts.edges[s]) {
      if (seen[e.target]) continue;
      seen[e.target] = true;
      parent[e.target] = s;
      via[e.target] = &e;
      work.push_back(e.target);
    }
  }
  return std::nullopt;
}

CheckStats ts_stats(const TransitionSystem& ts) { return {ts.size(), ts.transition_count(), 0, 0}; }

}  // namespace

CheckResult check_invariant(const TransitionSystem& ts, const Predicate& predicate) {
  CheckResult r;
  r.method = "bfs";
  r.stats = ts_stats(ts);
  r.counterexample = bfs_find(ts, [&](std::size_t s) { return !predicate.evaluate(ts.props[s]); });
  r.verdict = r.counterexample ? Verdict::violated : Verdict::holds;
  return r;
}

CheckResult check_reach(const TransitionSystem& ts, const Predicate& predicate) {
  CheckResult r;
  r.method = "bfs";
  r.stats = ts_stats(ts);
  r.counterexample = bfs_find(ts, [&](std::size_t s) { return predicate.evaluate(ts.props[s]); });
  r.verdict = r.counterexample ? Verdict::holds : Verdict::violated;
  return r;
}

namespace {

bool is_action_label(const std::string& s) {
  return s == "abstain" || (s.starts_with("output(") && s.ends_with(")"));
}

}  // namespace

TransitionSystem product(const TransitionSystem& ts, const SequentialAutomaton& pattern) {
  for (const auto& a : pattern.inputs) {
    if (!is_action_label(a)) {
      throw PropertyError("pattern '" + pattern.name + "' symbol '" + a +
                          "' is not an action label (output(...) or abstain)");
    }
  }
  auto advance = [&](StateId p, const std::string& label) {
    const auto a = pattern.input_index(label);
    if (a == npos) return p;
    const auto to = pattern.next[pattern.slot(p, a)];
    return to == npos ? p : to;
  };

  TransitionSystem out;
  out.inputs = ts.inputs;
  std::map<std::pair<std::size_t, StateId>, std::size_t> index;
  auto intern = [&](std::size_t s, StateId p) {
    auto [it, fresh] = index.try_emplace({s, p}, out.states.size());
    if (fresh) {
      out.states.push_back(ts.states[s]);
      auto props = ts.props[s];
      props.insert("pattern_state(" + pattern.states[p] + ")");
      if (pattern.is_final(p)) props.insert("accepting");
      out.props.push_back(std::move(props));
      out.edges.emplace_back();
      out.base_state.push_back(s);
      out.pattern_state.push_back(p);
    }
    return it->second;
  };
  out.initial = intern(ts.initial, pattern.initial);
  for (std::size_t k = 0; k < out.states.size(); ++k) {
    const auto s = out.base_state[k];
    const auto p = out.pattern_state[k];
    for (const auto& e : ts.edges[s]) {
      const auto target = intern(e.target, advance(p, e.label));
      out.edges[k].push_back({e.input, e.label, target});
    }
  }
  return out;
}

CheckResult check_bad_prefix(const TransitionSystem& ts, const SequentialAutomaton& pattern) {
  const auto prod = product(ts, pattern);
  CheckResult r;
  r.method = "product-bfs";
  r.stats = ts_stats(prod);
  auto found = bfs_find(prod, [&](std::size_t s) { return prod.props[s].contains("accepting"); });
  r.verdict = found ? Verdict::violated : Verdict::holds;
  if (found) {
    for (auto& step : found->steps) step.state = prod.base_state[step.state];
    found->final_state = prod.base_state[found->final_state];
    r.counterexample = std::move(found);
  }
  return r;
}

// ---------------------------------------------------------------------------

const MacroInput& InputPolicy::at(std::size_t clock) const {
  if (clock < prefix.size()) return prefix[clock];
  if (!cycle.empty()) return cycle[(clock - prefix.size()) % cycle.size()];
  if (prefix.empty()) throw UsageError("input policy is empty");
  return prefix.back();
}

std::size_t InputPolicy::phase(std::size_t clock) const {
  if (clock < prefix.size()) return clock;
  if (!cycle.empty()) return prefix.size() + (clock - prefix.size()) % cycle.size();
  return prefix.size();
}

ValidationReport validate(const Dtmc& dtmc) {
  ValidationReport report;
  if (dtmc.initial >= dtmc.size()) report.push_back({"initial", "dtmc", "initial state out of range"});
  for (std::size_t s = 0; s < dtmc.rows.size(); ++s) {
    double sum = 0.0;
    for (const auto& [t, p] : dtmc.rows[s]) {
      if (t >= dtmc.size()) report.push_back({"successor", "s" + std::to_string(s), "successor out of range"});
      if (!(p >= 0.0)) report.push_back({"distribution", "s" + std::to_string(s), "negative probability"});
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      report.push_back({"normalization", "s" + std::to_string(s), "row sums to " + std::to_string(sum)});
    }
  }
  return report;
}

namespace {

/// Replays a fixed prefix of choices (indices among the nonzero entries of
/// each distribution), extending it with first choices, and records the
/// branching seen along the way so the caller can enumerate all branches.
class ScriptedChooser final : public Chooser {
 public:
  std::vector<std::size_t> script;
  std::vector<std::size_t> width;
  double mass = 1.0;
  std::size_t pos = 0;

  std::size_t choose(const Distribution& d) override {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i].second > 0.0) live.push_back(i);
    }
    if (live.empty()) throw UsageError("distribution without mass");
    if (pos == script.size()) script.push_back(0);
    if (pos == width.size()) width.push_back(0);
    width[pos] = live.size();
    const auto pick = live[script[pos]];
    ++pos;
    mass *= d[pick].second;
    return pick;
  }

  /// Next script in depth-first order; false when every branch is done.
  bool next() {
    script.resize(pos);
    width.resize(pos);
    while (!script.empty()) {
      if (script.back() + 1 < width.back()) {
        ++script.back();
        break;
      }
      script.pop_back();
      width.pop_back();
    }
    pos = 0;
    mass = 1.0;
    return !script.empty();
  }
};

}  // namespace

std::vector<std::pair<MimicConfiguration, double>> macro_step_distribution(const MimicAutomaton& ma,
                                                                          const MimicConfiguration& cfg,
                                                                          const MacroInput& input, std::size_t cap) {
  std::vector<std::pair<MimicConfiguration, double>> out;
  std::unordered_map<std::string, std::size_t> index;
  ScriptedChooser chooser;
  std::size_t branches = 0;
  do {
    if (++branches > cap) {
      throw SizeLimitError("one macro tick of '" + ma.name + "' has more than " + std::to_string(cap) +
                           " random branches; use Monte Carlo estimation");
    }
    auto next = cfg;
    ma_advance(ma, next, input, StepContext{&chooser, nullptr});
    const double p = chooser.mass;
    auto [it, fresh] = index.try_emplace(canonical_key(next, true), out.size());
    if (fresh) {
      out.emplace_back(std::move(next), p);
    } else {
      out[it->second].second += p;
    }
  } while (chooser.next());
  return out;
}

Dtmc build_dtmc(const MimicAutomaton& ma, const MimicConfiguration& initial, const InputPolicy& policy,
                std::size_t bound, std::size_t cap) {
  Dtmc dtmc;
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](MimicConfiguration cfg) {
    const auto phase = policy.phase(cfg.macro_clock);
    auto key = canonical_key(cfg) + "#" + std::to_string(phase);
    auto [it, fresh] = index.try_emplace(std::move(key), dtmc.states.size());
    if (fresh) {
      if (dtmc.states.size() >= bound) throw ExplosionError(dtmc.states.size(), 0);
      dtmc.props.push_back(atomic_props(ma, cfg));
      dtmc.phase.push_back(phase);
      dtmc.states.push_back(std::move(cfg));
      dtmc.rows.emplace_back();
    }
    return it->second;
  };
  dtmc.initial = intern(initial);
  for (std::size_t s = 0; s < dtmc.states.size(); ++s) {
    // Clocks past the prefix are folded onto their phase, so the policy lookup uses a representative clock.
    auto cfg = dtmc.states[s];
    cfg.macro_clock = dtmc.phase[s];
    std::map<std::size_t, double> row;
    for (auto& [next, p] : macro_step_distribution(ma, cfg, policy.at(cfg.macro_clock), cap)) {
      try {
        row[intern(std::move(next))] += p;
      } catch (const ExplosionError&) {
        throw ExplosionError(dtmc.states.size(), dtmc.states.size() - s);
      }
    }
    dtmc.rows[s].assign(row.begin(), row.end());
  }
  return dtmc;
}

std::vector<double> value_iteration_step(const Dtmc& dtmc, const std::vector<bool>& target,
                                         const std::vector<double>& x) {
  std::vector<double> y(dtmc.size(), 0.0);
  for (std::size_t s = 0; s < dtmc.size(); ++s) {
    if (target[s]) {
      y[s] = 1.0;
      continue;
    }
    double acc = 0.0;
    for (const auto& [t, p] : dtmc.rows[s]) acc += p * x[t];
    y[s] = std::min(acc, 1.0);
  }
  return y;
}

namespace {

std::vector<bool> target_states(const Dtmc& dtmc, const Predicate& target) {
  std::vector<bool> hit(dtmc.size());
  for (std::size_t s = 0; s < dtmc.size(); ++s) hit[s] = target.evaluate(dtmc.props[s]);
  return hit;
}

std::vector<double> indicator(const std::vector<bool>& hit) {
  std::vector<double> x(hit.size());
  for (std::size_t s = 0; s < hit.size(); ++s) x[s] = hit[s] ? 1.0 : 0.0;
  return x;
}

CheckStats dtmc_stats(const Dtmc& dtmc) {
  CheckStats st;
  st.states = dtmc.size();
  for (const auto& row : dtmc.rows) st.transitions += row.size();
  return st;
}

}  // namespace

CheckResult reach_probability_exact(const Dtmc& dtmc, const Predicate& target, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
  const auto hit = target_states(dtmc, target);
  auto x = indicator(hit);
  CheckResult r;
  r.verdict = Verdict::probability;
  r.method = "value-iteration";
  r.stats = dtmc_stats(dtmc);
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    auto y = value_iteration_step(dtmc, hit, x);
    residual = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) residual = std::max(residual, std::abs(y[s] - x[s]));
    x = std::move(y);
    if (residual < tol) {
      r.probability = x[dtmc.initial];
      r.error_bound = residual;
      r.stats.iterations = it;
      return r;
    }
  }
  throw ConvergenceError(max_iter, residual);
}

CheckResult reach_probability_bounded(const Dtmc& dtmc, const Predicate& target, std::size_t steps) {
  const auto hit = target_states(dtmc, target);
  auto x = indicator(hit);
  for (std::size_t i = 0; i < steps; ++i) x = value_iteration_step(dtmc, hit, x);
  CheckResult r;
  r.verdict = Verdict::probability;
  r.method = "bounded-value-iteration";
  r.probability = x[dtmc.initial];
  r.error_bound = 0.0;
  r.stats = dtmc_stats(dtmc);
  r.stats.iterations = steps;
  return r;
}

namespace {

/// Atoms over cell values resolved to indices once; the rest go through prop_holds.
class CompiledTarget {
 public:
  CompiledTarget(const MimicAutomaton& ma, const Predicate& p) : ma_(ma), pred_(p) {
    const auto& shape = shape_of(ma.scheduler(ma.root()));
    for (const auto& a : p.atoms()) {
      const auto v = index_of(shape.cell_states, a.arg);
      value_.push_back(v == npos ? kNone : static_cast<CellValue>(v));
    }
  }

  bool operator()(const MimicConfiguration& cfg) const {
    return pred_.evaluate_with([&](const AtomicProp& a) {
      const auto v = value_[static_cast<std::size_t>(&a - pred_.atoms().data())];
      switch (a.kind) {
        case PropKind::lattice_has:
          return v != kNone && std::find(cfg.lattice.begin(), cfg.lattice.end(), v) != cfg.lattice.end();
        case PropKind::cell_value:
          return v != kNone && a.cell < cfg.lattice.size() && cfg.lattice[a.cell] == v;
        default:
          return prop_holds(ma_, cfg, a);
      }
    });
  }

 private:
  static constexpr CellValue kNone = ~CellValue{0};
  const MimicAutomaton& ma_;
  const Predicate& pred_;
  std::vector<CellValue> value_;
};

}  // namespace

CheckResult reach_probability_mc(const MimicAutomaton& ma, const MimicConfiguration& initial,
                                 const InputPolicy& policy, const Predicate& target, std::size_t horizon,
                                 std::size_t trials, std::uint64_t seed, std::size_t workers) {
  if (trials == 0) throw UsageError("Monte Carlo needs at least one trial");
  const CompiledTarget holds(ma, target);
  const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  auto run_blocks = [&](std::size_t begin, std::size_t end) {
    std::size_t hits = 0;
    for (std::size_t blk = begin; blk < end; ++blk) {
      RandomStream rng(derive_seed(seed, blk));
      SamplingChooser chooser(rng);
      const auto last = std::min(trials, (blk + 1) * kTrialBlock);
      for (std::size_t i = blk * kTrialBlock; i < last; ++i) {
        auto cfg = initial;
        bool hit = holds(cfg);
        for (std::size_t t = 0; t < horizon && !hit; ++t) {
          ma_advance(ma, cfg, policy.at(cfg.macro_clock), StepContext{&chooser, nullptr});
          hit = holds(cfg);
        }
        hits += hit ? 1 : 0;
      }
    }
    return hits;
  };

  workers = std::clamp<std::size_t>(workers, 1, blocks);
  std::vector<std::size_t> counts(workers, 0);
  if (workers == 1) {
    counts[0] = run_blocks(0, blocks);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { counts[w] = run_blocks(blocks * w / workers, blocks * (w + 1) / workers); });
    }
    for (auto& t : pool) t.join();
  }
  std::size_t hits = 0;
  for (auto c : counts) hits += c;

  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  CheckResult r;
  r.verdict = Verdict::probability;
  r.method = "monte-carlo";
  r.probability = p;
  r.error_bound = 1.96 * std::sqrt(p * (1.0 - p) / n);
  r.stats.trials = trials;
  return r;
}

std::string_view to_string(PropertyKind k) {
  switch (k) {
    case PropertyKind::invariant: return "invariant";
    case PropertyKind::reach: return "reach";
    case PropertyKind::bad_prefix: return "bad_prefix";
    case PropertyKind::probability: return "probability";
  }
  return "?";
}

std::string_view to_string(ProbabilityMethod m) {
  return m == ProbabilityMethod::exact ? "exact" : "monte_carlo";
}

}  // namespace mimic

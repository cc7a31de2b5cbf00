#pragma once

// A deliberately naive mimic-automaton interpreter over its own plain data
// model, plus a seeded generator of small models and a converter to the
// library types. Used as the oracle for ma_run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mimic/composition.hpp"

namespace ref {

using Cells = std::vector<int>;
using Word = std::vector<std::string>;

struct Sa {
  std::string name;
  std::vector<std::string> states;
  int initial = 0;
  std::set<int> finals;
  std::vector<std::string> inputs{"0", "1"};
  std::vector<std::string> outputs{"x", "y"};
  bool partial = false;
  std::map<std::pair<int, std::string>, std::pair<int, std::string>> delta;
};

struct Ca {
  std::string name;
  int q = 2;
  int width = 1;
  int radius = 1;
  bool periodic = true;
  int fixed = 0;
  std::map<Cells, int> rule;
};

/// sas[0] is the root; sas[i] refines state parent_state[i] of sas[parent[i]].
struct Ha {
  std::string name;
  std::vector<Sa> sas;
  std::vector<int> parent;
  std::vector<int> parent_state;
};

struct Unit {
  enum Kind { sa, ha, nested } kind = sa;
  int index = 0;
};

struct Voter {
  bool plurality = false;
  int quorum = 1;
  std::vector<Word> preference;
};

struct Binding {
  std::string name;
  bool mode1 = true;
  int ca = 0;
  std::vector<Unit> cell_map;
  std::optional<Cells> initial;
  std::optional<Voter> voter;
  int outer = 0;
  std::map<Cells, std::string> readout;
  std::map<std::string, Cells> seeds;
  int t_max = 0;
};

struct Model {
  std::vector<Sa> sas;
  std::vector<Ca> cas;
  std::vector<Ha> has;
  std::vector<Binding> bindings;  // bindings[0] is the root
};

struct Config;

struct UnitState {
  int sa_state = 0;
  std::map<int, int> ha;
  std::vector<Config> nested;
};

struct Config {
  Cells lattice;
  std::vector<UnitState> units;
  int outer = 0;
  int clock = 0;
};

struct Tick {
  Cells before;
  Cells after;
  std::optional<Word> observed;
  std::vector<Word> cell_outputs;
};

struct RootStuck : std::runtime_error {
  RootStuck() : std::runtime_error("outer automaton stuck") {}
};

// ---------------------------------------------------------------------------
// Semantics

inline Cells all_of(int width, int v) { return Cells(static_cast<std::size_t>(width), v); }

inline Cells ca_step(const Ca& ca, const Cells& x) {
  Cells y(x.size());
  for (int i = 0; i < ca.width; ++i) {
    Cells nb;
    for (int j = i - ca.radius; j <= i + ca.radius; ++j) {
      if (j >= 0 && j < ca.width) {
        nb.push_back(x[static_cast<std::size_t>(j)]);
      } else if (ca.periodic) {
        nb.push_back(x[static_cast<std::size_t>(((j % ca.width) + ca.width) % ca.width)]);
      } else {
        nb.push_back(ca.fixed);
      }
    }
    y[static_cast<std::size_t>(i)] = ca.rule.at(nb);
  }
  return y;
}

inline std::optional<Word> vote(const Voter& v, const std::vector<Word>& outs) {
  std::map<Word, int> count;
  for (const auto& w : outs) ++count[w];
  int best = 0;
  for (const auto& [w, n] : count) best = std::max(best, n);
  if (outs.empty() || best < v.quorum) return std::nullopt;
  std::vector<Word> top;
  for (const auto& [w, n] : count) {
    if (n == best) top.push_back(w);
  }
  if (top.size() == 1) return top[0];
  if (!v.plurality) return std::nullopt;
  for (const auto& p : v.preference) {
    if (std::find(top.begin(), top.end(), p) != top.end()) return p;
  }
  return std::nullopt;
}

class Interpreter {
 public:
  explicit Interpreter(const Model& m) : m_(m) {}

  Config init(int b, std::optional<Cells> lattice0 = std::nullopt) const {
    const auto& bd = m_.bindings[static_cast<std::size_t>(b)];
    const auto& ca = m_.cas[static_cast<std::size_t>(bd.ca)];
    Config c;
    c.lattice = lattice0 ? *lattice0 : bd.initial ? *bd.initial : all_of(ca.width, 0);
    if (bd.mode1) {
      for (int v : c.lattice) c.units.push_back(init_unit(bd.cell_map[static_cast<std::size_t>(v)]));
    } else {
      c.outer = m_.sas[static_cast<std::size_t>(bd.outer)].initial;
    }
    return c;
  }

  /// One macro tick of binding `b`; the input is a block (mode 1) or a start lattice (mode 2).
  Tick tick(int b, Config& c, const Word& block, const Cells& seed) const {
    const auto& bd = m_.bindings[static_cast<std::size_t>(b)];
    const auto& ca = m_.cas[static_cast<std::size_t>(bd.ca)];
    Tick t;
    t.before = c.lattice;
    if (bd.mode1) {
      for (std::size_t i = 0; i < c.lattice.size(); ++i) {
        auto r = run_unit(bd.cell_map[static_cast<std::size_t>(c.lattice[i])], c.units[i], block);
        t.cell_outputs.push_back(r.out);
      }
      if (bd.voter) {
        t.observed = vote(*bd.voter, t.cell_outputs);
      } else {
        Word all;
        for (const auto& w : t.cell_outputs) all.insert(all.end(), w.begin(), w.end());
        t.observed = all;
      }
      const auto next = ca_step(ca, c.lattice);
      for (std::size_t i = 0; i < next.size(); ++i) {
        if (next[i] != c.lattice[i]) c.units[i] = init_unit(bd.cell_map[static_cast<std::size_t>(next[i])]);
      }
      c.lattice = next;
      ++c.clock;
    } else {
      auto x = seed;
      for (int s = 0; s < bd.t_max; ++s) {
        auto y = ca_step(ca, x);
        if (y == x) break;
        x = y;
      }
      const auto sym = bd.readout.at(x);
      const auto& outer = m_.sas[static_cast<std::size_t>(bd.outer)];
      auto it = outer.delta.find({c.outer, sym});
      if (it == outer.delta.end()) throw RootStuck();
      c.outer = it->second.first;
      c.lattice = x;
      ++c.clock;
      t.observed = Word{it->second.second};
    }
    t.after = c.lattice;
    return t;
  }

  std::string key(int b, const Config& c, bool clock) const {
    const auto& bd = m_.bindings[static_cast<std::size_t>(b)];
    std::string s = "L";
    for (std::size_t i = 0; i < c.lattice.size(); ++i) s += (i ? "," : "") + std::to_string(c.lattice[i]);
    s += "|U[";
    for (std::size_t i = 0; i < c.units.size(); ++i) {
      const auto& u = bd.cell_map[static_cast<std::size_t>(c.lattice[i])];
      const auto& st = c.units[i];
      if (u.kind == Unit::sa) {
        s += "s" + std::to_string(st.sa_state);
      } else if (u.kind == Unit::ha) {
        s += "h{";
        for (const auto& [k, v] : st.ha) s += std::to_string(k) + ":" + std::to_string(v) + ",";
        s += "}";
      } else {
        s += "n(" + key(u.index, st.nested[0], clock) + ";)";
      }
      s += " ";
    }
    s += "]|O" + std::to_string(c.outer);
    if (clock) s += "|C" + std::to_string(c.clock);
    return s;
  }

 private:
  struct UnitRun {
    Word out;
    bool abstained = false;
  };

  UnitState init_unit(const Unit& u) const {
    UnitState st;
    if (u.kind == Unit::sa) {
      st.sa_state = m_.sas[static_cast<std::size_t>(u.index)].initial;
    } else if (u.kind == Unit::ha) {
      enter(m_.has[static_cast<std::size_t>(u.index)], 0, st.ha);
    } else {
      st.nested.push_back(init(u.index));
    }
    return st;
  }

  /// Activates `sa` at its initial state and, recursively, what that state refines.
  static void enter(const Ha& h, int sa, std::map<int, int>& active) {
    activate(h, sa, h.sas[static_cast<std::size_t>(sa)].initial, active);
  }

  static void activate(const Ha& h, int sa, int state, std::map<int, int>& active) {
    active[sa] = state;
    for (std::size_t k = 1; k < h.sas.size(); ++k) {
      if (h.parent[k] == sa && h.parent_state[k] == state) enter(h, static_cast<int>(k), active);
    }
  }

  static bool below(const Ha& h, int k, int ancestor) {
    for (int p = h.parent[static_cast<std::size_t>(k)]; p >= 0; p = h.parent[static_cast<std::size_t>(p)]) {
      if (p == ancestor) return true;
    }
    return false;
  }

  static int depth(const Ha& h, int k) {
    int d = 0;
    for (int p = h.parent[static_cast<std::size_t>(k)]; p >= 0; p = h.parent[static_cast<std::size_t>(p)]) ++d;
    return d;
  }

  UnitRun run_unit(const Unit& u, UnitState& st, const Word& block) const {
    UnitRun r;
    if (u.kind == Unit::sa) {
      const auto& sa = m_.sas[static_cast<std::size_t>(u.index)];
      for (const auto& a : block) {
        auto it = sa.delta.find({st.sa_state, a});
        if (it == sa.delta.end()) break;
        st.sa_state = it->second.first;
        r.out.push_back(it->second.second);
      }
      return r;
    }
    if (u.kind == Unit::ha) {
      const auto& h = m_.has[static_cast<std::size_t>(u.index)];
      for (const auto& a : block) {
        int best = -1;
        for (const auto& [k, s] : st.ha) {
          if (h.sas[static_cast<std::size_t>(k)].delta.contains({s, a})) {
            const int d = depth(h, k);
            if (best < 0 || d < best) best = d;
          }
        }
        if (best < 0) break;
        std::vector<std::pair<int, std::pair<int, std::string>>> fired;
        for (const auto& [k, s] : st.ha) {
          if (depth(h, k) != best) continue;
          auto it = h.sas[static_cast<std::size_t>(k)].delta.find({s, a});
          if (it != h.sas[static_cast<std::size_t>(k)].delta.end()) fired.push_back({k, it->second});
        }
        r.out.push_back(fired.front().second.second);
        for (const auto& [k, target] : fired) {
          if (st.ha.at(k) == target.first) continue;
          for (auto it = st.ha.begin(); it != st.ha.end();) {
            it = below(h, it->first, k) ? st.ha.erase(it) : std::next(it);
          }
          activate(h, k, target.first, st.ha);
        }
      }
      return r;
    }
    const auto& nb = m_.bindings[static_cast<std::size_t>(u.index)];
    auto& cfg = st.nested[0];
    if (nb.mode1) {
      auto t = tick(u.index, cfg, block, {});
      if (t.observed) {
        r.out = *t.observed;
      } else {
        r.abstained = true;
      }
      return r;
    }
    for (const auto& a : block) {
      auto t = tick(u.index, cfg, {}, nb.seeds.at(a));
      r.out.push_back(t.observed->front());
    }
    return r;
  }

  const Model& m_;
};

// ---------------------------------------------------------------------------
// Generation

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

inline std::vector<Cells> all_lattices(int q, int width) {
  std::vector<Cells> out{{}};
  for (int i = 0; i < width; ++i) {
    std::vector<Cells> next;
    for (const auto& c : out) {
      for (int v = 0; v < q; ++v) {
        auto d = c;
        d.push_back(v);
        next.push_back(d);
      }
    }
    out = std::move(next);
  }
  return out;
}

inline Cells random_lattice(Rng& rng, int q, int width) {
  Cells c;
  for (int i = 0; i < width; ++i) c.push_back(pick(rng, 0, q - 1));
  return c;
}

inline Sa random_sa(Rng& rng, std::string name, bool partial, std::vector<std::string> inputs = {"0", "1"},
                    std::vector<std::string> outputs = {"x", "y"}) {
  Sa sa;
  sa.name = std::move(name);
  const int n = pick(rng, 1, 4);
  for (int s = 0; s < n; ++s) sa.states.push_back("s" + std::to_string(s));
  sa.initial = pick(rng, 0, n - 1);
  for (int s = 0; s < n; ++s) {
    if (chance(rng, 0.5)) sa.finals.insert(s);
  }
  sa.inputs = std::move(inputs);
  sa.outputs = std::move(outputs);
  sa.partial = partial;
  for (int s = 0; s < n; ++s) {
    for (const auto& a : sa.inputs) {
      if (partial && chance(rng, 0.35)) continue;
      sa.delta[{s, a}] = {pick(rng, 0, n - 1), sa.outputs[static_cast<std::size_t>(pick(rng, 0, int(sa.outputs.size()) - 1))]};
    }
  }
  return sa;
}

inline Ca random_ca(Rng& rng, std::string name, int max_q, int max_width) {
  Ca ca;
  ca.name = std::move(name);
  ca.q = pick(rng, 1, max_q);
  ca.width = pick(rng, 1, max_width);
  ca.periodic = chance(rng, 0.5);
  ca.fixed = pick(rng, 0, ca.q - 1);
  const bool sticky = chance(rng, 0.5);
  for (const auto& nb : all_lattices(ca.q, 2 * ca.radius + 1)) {
    ca.rule[nb] = sticky && chance(rng, 0.6) ? nb[static_cast<std::size_t>(ca.radius)] : pick(rng, 0, ca.q - 1);
  }
  return ca;
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  Model model() {
    m_ = Model{};
    m_.bindings.emplace_back();
    if (chance(rng_, 0.12)) {
      make_mode2(0);
    } else {
      make_mode1(0, true);
    }
    return m_;
  }

  /// Two distinct root inputs: blocks over {0,1} (mode 1) or start lattices (mode 2).
  std::pair<std::vector<Word>, std::vector<Cells>> universe(const Model& m) {
    const auto& root = m.bindings[0];
    if (root.mode1) {
      std::vector<Word> blocks;
      while (blocks.size() < 2) {
        Word w;
        for (int i = pick(rng_, 0, 2); i > 0; --i) w.push_back(chance(rng_, 0.5) ? "1" : "0");
        if (std::find(blocks.begin(), blocks.end(), w) == blocks.end()) blocks.push_back(w);
      }
      return {blocks, {}};
    }
    const auto& ca = m.cas[static_cast<std::size_t>(root.ca)];
    auto all = all_lattices(ca.q, ca.width);
    std::shuffle(all.begin(), all.end(), rng_);
    if (all.size() == 1) all.push_back(all[0]);
    return {{}, {all[0], all[1]}};
  }

  Rng& rng() { return rng_; }

 private:
  std::string fresh(const char* prefix) { return prefix + std::to_string(counter_++); }

  void make_mode1(int b, bool top) {
    const int ca = static_cast<int>(m_.cas.size());
    m_.cas.push_back(random_ca(rng_, fresh("ca"), 3, top ? 4 : 3));
    const auto& c = m_.cas.back();
    const int q = c.q;
    const int width = c.width;
    auto& bd = m_.bindings[static_cast<std::size_t>(b)];
    bd.name = fresh("b");
    bd.mode1 = true;
    bd.ca = ca;
    if (!top && chance(rng_, 0.5)) bd.initial = random_lattice(rng_, q, width);
    if (chance(rng_, 0.35)) {
      Voter v;
      v.plurality = chance(rng_, 0.4);
      v.quorum = pick(rng_, 1, width);
      for (int i = pick(rng_, 0, 3); i > 0; --i) {
        Word w;
        for (int j = pick(rng_, 0, 2); j > 0; --j) w.push_back(chance(rng_, 0.5) ? "x" : "y");
        v.preference.push_back(w);
      }
      m_.bindings[static_cast<std::size_t>(b)].voter = v;
    }
    std::vector<Unit> cells;
    for (int v = 0; v < q; ++v) {
      const double roll = std::uniform_real_distribution<double>(0, 1)(rng_);
      Unit u;
      if (top && roll < 0.3) {
        u.kind = Unit::nested;
        u.index = static_cast<int>(m_.bindings.size());
        m_.bindings.emplace_back();
        if (chance(rng_, 0.5)) {
          make_mode1(u.index, false);
        } else {
          make_mode2(u.index);
        }
      } else if (roll < 0.5) {
        u.kind = Unit::ha;
        u.index = static_cast<int>(m_.has.size());
        m_.has.push_back(random_ha());
      } else {
        u.kind = Unit::sa;
        u.index = static_cast<int>(m_.sas.size());
        m_.sas.push_back(random_sa(rng_, fresh("sa"), false));
      }
      cells.push_back(u);
    }
    m_.bindings[static_cast<std::size_t>(b)].cell_map = cells;
  }

  void make_mode2(int b) {
    const int ca = static_cast<int>(m_.cas.size());
    m_.cas.push_back(random_ca(rng_, fresh("ca"), 3, 3));
    const auto c = m_.cas.back();
    const int outer = static_cast<int>(m_.sas.size());
    m_.sas.push_back(random_sa(rng_, fresh("sa"), false, {"0", "1"}, {"x", "y"}));
    auto& bd = m_.bindings[static_cast<std::size_t>(b)];
    bd.name = fresh("b");
    bd.mode1 = false;
    bd.ca = ca;
    bd.outer = outer;
    bd.t_max = pick(rng_, 0, 3);
    for (const auto& l : all_lattices(c.q, c.width)) bd.readout[l] = chance(rng_, 0.5) ? "1" : "0";
    bd.seeds["0"] = random_lattice(rng_, c.q, c.width);
    bd.seeds["1"] = random_lattice(rng_, c.q, c.width);
    if (chance(rng_, 0.5)) bd.initial = random_lattice(rng_, c.q, c.width);
  }

  Ha random_ha() {
    Ha h;
    h.name = fresh("ha");
    h.sas.push_back(random_sa(rng_, fresh("sa"), true));
    h.parent.push_back(-1);
    h.parent_state.push_back(-1);
    const int extra = pick(rng_, 1, 2);
    for (int k = 0; k < extra; ++k) {
      const int parent = pick(rng_, 0, static_cast<int>(h.sas.size()) - 1);
      const int state = pick(rng_, 0, static_cast<int>(h.sas[static_cast<std::size_t>(parent)].states.size()) - 1);
      h.sas.push_back(random_sa(rng_, fresh("sa"), true));
      h.parent.push_back(parent);
      h.parent_state.push_back(state);
    }
    return h;
  }

  Rng rng_;
  Model m_;
  int counter_ = 0;
};

// ---------------------------------------------------------------------------
// Conversion to the library

inline mimic::SequentialAutomaton to_lib(const Sa& sa) {
  mimic::SaBuilder b(sa.name);
  std::vector<std::string> finals;
  for (int f : sa.finals) finals.push_back(sa.states[static_cast<std::size_t>(f)]);
  b.states(sa.states).initial(sa.states[static_cast<std::size_t>(sa.initial)]).finals(finals);
  b.inputs(sa.inputs).outputs(sa.outputs).partial(sa.partial);
  for (const auto& [k, v] : sa.delta) {
    b.on(sa.states[static_cast<std::size_t>(k.first)], k.second, sa.states[static_cast<std::size_t>(v.first)], v.second);
  }
  return b.build();
}

inline mimic::Lattice to_lib(const Cells& c) { return mimic::Lattice(c.begin(), c.end()); }

inline mimic::CellularAutomaton to_lib(const Ca& ca) {
  mimic::CellularAutomaton out;
  out.name = ca.name;
  for (int v = 0; v < ca.q; ++v) out.shape.cell_states.push_back("q" + std::to_string(v));
  out.shape.width = static_cast<std::size_t>(ca.width);
  out.shape.radius = static_cast<std::size_t>(ca.radius);
  out.shape.boundary = ca.periodic ? mimic::Boundary{} : mimic::Boundary{mimic::BoundaryKind::fixed, static_cast<mimic::CellValue>(ca.fixed)};
  const auto size = static_cast<std::size_t>(std::pow(ca.q, 2 * ca.radius + 1));
  out.rule.assign(size, 0);
  for (const auto& [nb, v] : ca.rule) {
    std::size_t code = 0;
    for (int x : nb) code = code * static_cast<std::size_t>(ca.q) + static_cast<std::size_t>(x);
    out.rule[code] = static_cast<mimic::CellValue>(v);
  }
  return out;
}

inline mimic::HierarchicalAutomaton to_lib(const Ha& h) {
  mimic::HierarchicalAutomaton out;
  out.name = h.name;
  for (const auto& sa : h.sas) out.sas.push_back(to_lib(sa));
  for (std::size_t k = 1; k < h.sas.size(); ++k) {
    out.gamma[{static_cast<std::size_t>(h.parent[k]), static_cast<mimic::StateId>(h.parent_state[k])}].push_back(k);
  }
  return out;
}

inline mimic::MimicAutomaton to_lib(const Model& m) {
  mimic::MimicAutomaton ma;
  ma.name = "generated";
  for (const auto& sa : m.sas) ma.sas[sa.name] = to_lib(sa);
  for (const auto& ca : m.cas) ma.cas[ca.name] = to_lib(ca);
  for (const auto& h : m.has) ma.has[h.name] = to_lib(h);
  for (const auto& bd : m.bindings) {
    mimic::Binding b;
    b.name = bd.name;
    b.mode = bd.mode1 ? mimic::BindingMode::sa_from_ca : mimic::BindingMode::ca_from_sa;
    b.ca = m.cas[static_cast<std::size_t>(bd.ca)].name;
    for (const auto& u : bd.cell_map) {
      if (u.kind == Unit::sa) {
        b.cell_map.push_back(mimic::PlainSaUnit{m.sas[static_cast<std::size_t>(u.index)].name});
      } else if (u.kind == Unit::ha) {
        b.cell_map.push_back(mimic::HaUnit{m.has[static_cast<std::size_t>(u.index)].name, ""});
      } else {
        b.cell_map.push_back(mimic::NestedUnit{m.bindings[static_cast<std::size_t>(u.index)].name});
      }
    }
    if (bd.initial) b.initial = to_lib(*bd.initial);
    if (bd.voter) {
      mimic::VoterPolicy v;
      v.kind = bd.voter->plurality ? mimic::VoterKind::plurality_with_tiebreak : mimic::VoterKind::strict_majority;
      v.quorum = static_cast<std::size_t>(bd.voter->quorum);
      v.preference = bd.voter->preference;
      b.voter = v;
    }
    if (!bd.mode1) {
      b.outer_sa = m.sas[static_cast<std::size_t>(bd.outer)].name;
      mimic::ReadoutTable t;
      for (const auto& [l, s] : bd.readout) t.entries[to_lib(l)] = s;
      b.readout = t;
      for (const auto& [s, l] : bd.seeds) b.seeds[s] = to_lib(l);
      b.t_max = static_cast<std::size_t>(bd.t_max);
    }
    ma.bindings[b.name] = b;
  }
  ma.root_binding = m.bindings[0].name;
  return ma;
}

}  // namespace ref

#pragma once

// Small hand-built automata shared by the test binaries.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mimic/automata.hpp"
#include "mimic/composition.hpp"
#include "mimic/dhr.hpp"

namespace fx {

using namespace mimic;

inline std::filesystem::path source_dir() { return MIMIC_SOURCE_DIR; }
inline std::filesystem::path model_path(const std::string& name) { return source_dir() / "models" / name; }

/// Even/odd tracker: flips on '1', holds on '0'; finals = {even}.
inline SequentialAutomaton parity_sa(std::string name = "parity") {
  return SaBuilder(std::move(name))
      .states({"even", "odd"})
      .initial("even")
      .finals({"even"})
      .inputs({"0", "1"})
      .on("even", "0", "even")
      .on("even", "1", "odd")
      .on("odd", "0", "odd")
      .on("odd", "1", "even")
      .build();
}

/// One state, emits `out` on every input of {0,1}.
inline SequentialAutomaton constant_sa(std::string name, std::string out, std::vector<std::string> outputs = {"A", "B"}) {
  return SaBuilder(std::move(name))
      .states({"s"})
      .initial("s")
      .inputs({"0", "1"})
      .outputs(std::move(outputs))
      .on("s", "0", "s", out)
      .on("s", "1", "s", out)
      .build();
}

/// Echoes its input as the output symbol; state counts ones mod 2.
inline SequentialAutomaton echo_sa(std::string name) {
  return SaBuilder(std::move(name))
      .states({"e", "o"})
      .initial("e")
      .inputs({"0", "1"})
      .outputs({"0", "1"})
      .on("e", "0", "e", "0")
      .on("e", "1", "o", "1")
      .on("o", "0", "o", "0")
      .on("o", "1", "e", "1")
      .build();
}

/// Like echo_sa but outputs the complement.
inline SequentialAutomaton flip_sa(std::string name) {
  return SaBuilder(std::move(name))
      .states({"s"})
      .initial("s")
      .inputs({"0", "1"})
      .outputs({"0", "1"})
      .on("s", "0", "s", "1")
      .on("s", "1", "s", "0")
      .build();
}

inline LatticeShape binary(std::size_t width, Boundary b = {}) { return LatticeShape{{"0", "1"}, width, 1, b}; }

inline CellularAutomaton xor_ca(std::size_t width) { return make_ca("xor", binary(width), RuleForm::xor_rule); }
inline CellularAutomaton identity_ca(std::vector<std::string> q, std::size_t width) {
  return make_ca("identity", LatticeShape{std::move(q), width, 1, {}}, RuleForm::identity);
}

/// 1-cell identity CA hosting the parity SA.
inline MimicAutomaton parity_ma() {
  MimicAutomaton ma;
  ma.name = "parity_ma";
  ma.sas["parity"] = parity_sa();
  ma.cas["hold"] = identity_ca({"host"}, 1);
  Binding b;
  b.name = "parity_cell";
  b.ca = "hold";
  b.cell_map = {PlainSaUnit{"parity"}};
  ma.bindings[b.name] = b;
  ma.root_binding = b.name;
  return ma;
}

/// 1-cell PCA: 0 -> {0: 0.5, 1: 0.5}, 1 -> 1.
inline ProbabilisticCellularAutomaton flip_pca(std::size_t width = 1) {
  ProbabilisticCellularAutomaton p;
  p.name = "flip";
  p.shape = binary(width);
  p.rule.resize(8);
  for (std::size_t code = 0; code < 8; ++code) {
    const auto center = p.shape.decode_neighborhood(code)[1];
    p.rule[code] = center == 0 ? Distribution{{0, 0.5}, {1, 0.5}} : Distribution{{1, 1.0}};
  }
  return p;
}

inline SequentialAutomaton idle_sa() {
  return SaBuilder("idle").states({"s"}).initial("s").inputs({"t"}).on("s", "t", "s").build();
}

inline MimicAutomaton host_ma(Scheduler sched, std::string name = "flip_ma") {
  MimicAutomaton ma;
  ma.name = std::move(name);
  ma.sas["idle"] = idle_sa();
  const auto q = shape_of(sched).cell_states.size();
  ma.cas[name_of(sched)] = std::move(sched);
  Binding b;
  b.name = "cell";
  b.ca = ma.cas.begin()->first;
  b.cell_map.assign(q, PlainSaUnit{"idle"});
  ma.bindings[b.name] = b;
  ma.root_binding = b.name;
  return ma;
}

/// Width-3 DHR over three executors with an identity scheduler.
inline DhrStructure dhr3(std::vector<SequentialAutomaton> execs, std::size_t quorum = 2) {
  DhrStructure d;
  d.name = "dhr3";
  d.executors = std::move(execs);
  d.scheduler = identity_ca({"a", "b", "c"}, 3);
  d.voter = VoterPolicy{VoterKind::strict_majority, quorum, {}};
  d.initial_lattice = {0, 1, 2};
  return d;
}

/// Parity of the ones seen so far, emitted as "0"/"1" after each symbol.
inline SequentialAutomaton parity_bit(std::string name, bool swapped = false) {
  const std::string e = swapped ? "p" : "q";
  const std::string o = swapped ? "q" : "p";
  return SaBuilder(std::move(name))
      .states(swapped ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"q", "p"})
      .initial(e)
      .inputs({"0", "1"})
      .outputs({"0", "1"})
      .on(e, "0", e, "0")
      .on(e, "1", o, "1")
      .on(o, "0", o, "1")
      .on(o, "1", e, "0")
      .build();
}

/// Same function with a redundant third state.
inline SequentialAutomaton parity_bit3(std::string name) {
  return SaBuilder(std::move(name))
      .states({"e", "o", "e2"})
      .initial("e")
      .inputs({"0", "1"})
      .outputs({"0", "1"})
      .on("e", "0", "e2", "0")
      .on("e2", "0", "e", "0")
      .on("e", "1", "o", "1")
      .on("e2", "1", "o", "1")
      .on("o", "0", "o", "1")
      .on("o", "1", "e2", "0")
      .build();
}

/// Stateless variants computing out = in with different internal shapes.
inline SequentialAutomaton echo_variant(std::string name, std::size_t states) {
  SaBuilder b(std::move(name));
  std::vector<std::string> names;
  for (std::size_t s = 0; s < states; ++s) names.push_back("s" + std::to_string(s));
  b.states(names).initial("s0").inputs({"0", "1"}).outputs({"0", "1"});
  for (std::size_t s = 0; s < states; ++s) {
    const auto next = names[(s + 1) % states];
    b.on(names[s], "0", next, "0").on(names[s], "1", names[s], "1");
  }
  return b.build();
}

/// Variant q emits its own name for every symbol.
inline SequentialAutomaton tag_sa(std::string tag) {
  return SaBuilder("tag_" + tag)
      .states({"s"})
      .initial("s")
      .inputs({"0", "1"})
      .outputs({"a", "b", "c"})
      .on("s", "0", "s", tag)
      .on("s", "1", "s", tag)
      .build();
}

/// Width-3 cyclic shift: new cell i = old cell i-1.
inline CellularAutomaton shift3() {
  LatticeShape shape{{"a", "b", "c"}, 3, 1, {}};
  CellularAutomaton ca;
  ca.name = "shift";
  ca.shape = shape;
  for (std::size_t code = 0; code < 27; ++code) ca.rule.push_back(shape.decode_neighborhood(code)[0]);
  return ca;
}

inline std::vector<Word> all_words(std::vector<std::string> alphabet, std::size_t max_len, std::size_t min_len = 0) {
  std::vector<Word> out;
  std::vector<Word> layer{{}};
  for (std::size_t len = 0; len <= max_len; ++len) {
    if (len >= min_len) out.insert(out.end(), layer.begin(), layer.end());
    std::vector<Word> next;
    for (const auto& w : layer) {
      for (const auto& a : alphabet) {
        auto v = w;
        v.push_back(a);
        next.push_back(v);
      }
    }
    layer = std::move(next);
  }
  return out;
}

/// Every schedule of at most `max_ticks` blocks, each block of length <= 3 over {0,1}.
inline std::vector<std::vector<Word>> schedules(std::size_t max_ticks) {
  const auto blocks = fx::all_words({"0", "1"}, 3);
  std::vector<std::vector<Word>> out{{}};
  std::vector<std::vector<Word>> layer{{}};
  for (std::size_t t = 0; t < max_ticks; ++t) {
    std::vector<std::vector<Word>> next;
    for (const auto& s : layer) {
      for (const auto& b : blocks) {
        auto v = s;
        v.push_back(b);
        next.push_back(v);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

/// Always answers "1".
inline SequentialAutomaton stuck_one(std::string name) {
  return SaBuilder(std::move(name))
      .states({"s"})
      .initial("s")
      .inputs({"0", "1"})
      .outputs({"0", "1"})
      .on("s", "0", "s", "1")
      .on("s", "1", "s", "1")
      .build();
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Every file under models/, sorted.
inline std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(source_dir() / "models")) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CliOutcome {
  int code = -1;
  std::string out;
};

/// Runs the ma binary with `args`, capturing stdout; stderr is discarded.
inline CliOutcome run_cli(const std::string& args) {
  const auto cmd = std::string("\"") + MA_BINARY + "\" " + args + " 2>/dev/null";
  CliOutcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

/// A models/ file as a quoted CLI argument.
inline std::string quoted_model(const std::string& name) { return "\"" + model_path(name).string() + "\""; }
inline std::string quoted_signatures() { return "\"" + (source_dir() / "models" / "signatures").string() + "\""; }

}  // namespace fx

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "checking.hpp"
#include "documents.hpp"
#include "fixtures.hpp"
#include "mimic/detect.hpp"
#include "mimic/format.hpp"

using namespace mimic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1 and 2: reference equivalence and synchrony on one generated family

struct Counter : MacroObserver {
  std::size_t steps = 0;
  std::size_t outer = 0;
  std::size_t bad_host = 0;
  Lattice tick_start;
  void unit_symbol(std::size_t depth, std::size_t, const Lattice& host) override {
    if (depth == 1 && host != tick_start) ++bad_host;
  }
  void scheduler_step(std::size_t depth, const Lattice&, const Lattice&) override { steps += depth == 1; }
  void outer_step(std::size_t depth, StateId, StateId) override { outer += depth == 1; }
};

struct FamilyResult {
  std::size_t instances = 0;
  std::size_t runs = 0;
  std::size_t mismatches = 0;
  std::size_t sync_violations = 0;
  double seconds = 0;
};

const FamilyResult& family() {
  static const FamilyResult result = [] {
    FamilyResult r;
    const auto t0 = Clock::now();
    ref::Generator gen(20240601);
    for (int instance = 0; instance < 1200; ++instance) {
      const auto model = gen.model();
      const auto ma = ref::to_lib(model);
      const auto [blocks, seeds] = gen.universe(model);
      const ref::Interpreter interp(model);
      const bool mode1 = model.bindings[0].mode1;
      const std::size_t k = mode1 ? blocks.size() : seeds.size();
      ++r.instances;
      for (std::size_t len = 0; len <= 3; ++len) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < len; ++i) count *= k;
        for (std::size_t code = 0; code < count; ++code) {
          ++r.runs;
          std::vector<MacroInput> sched;
          for (std::size_t i = 0, c = code; i < len; ++i, c /= k) {
            sched.push_back(mode1 ? MacroInput{blocks[c % k]} : MacroInput{ref::to_lib(seeds[c % k])});
          }
          auto rc = interp.init(0);
          const auto cfg = ma_initial(ma, ref::to_lib(rc.lattice));
          std::vector<ref::Tick> expected;
          bool ref_stuck = false;
          for (const auto& in : sched) {
            try {
              expected.push_back(mode1 ? interp.tick(0, rc, std::get<Word>(in), {})
                                       : interp.tick(0, rc, {}, ref::Cells(std::get<Lattice>(in).begin(), std::get<Lattice>(in).end())));
            } catch (const ref::RootStuck&) {
              ref_stuck = true;
              break;
            }
          }
          MaRun run;
          try {
            run = ma_run(ma, cfg, sched);
          } catch (const StuckError&) {
            r.mismatches += !ref_stuck;
            continue;
          }
          if (ref_stuck) {
            ++r.mismatches;
            continue;
          }
          bool same = canonical_key(run.config, true) == interp.key(0, rc, true) && run.trace.size() == expected.size();
          for (std::size_t i = 0; same && i < len; ++i) {
            same = run.trace[i].lattice_before == ref::to_lib(expected[i].before) &&
                   run.trace[i].lattice_after == ref::to_lib(expected[i].after) &&
                   observed_output(ma.root(), run.trace[i]) == expected[i].observed;
          }
          r.mismatches += !same;

          // Synchrony: one clock tick and exactly one global map (or outer step) per tick,
          // with every hosted symbol read against the lattice the tick started from.
          Counter counter;
          MimicConfiguration cur = cfg;
          for (const auto& in : sched) {
            counter.tick_start = cur.lattice;
            cur = ma_macro_step(ma, cur, in, StepContext{nullptr, &counter}).config;
          }
          const bool sync = run.config.macro_clock == len && (mode1 ? counter.steps : counter.outer) == len &&
                            counter.bad_host == 0;
          r.sync_violations += !sync;
        }
      }
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return result;
}

Outcome oracle_equivalence() {
  const auto& f = family();
  return {f.instances >= 1000 && f.mismatches == 0 && f.seconds < 60,
          std::to_string(f.instances) + " MAs, " + std::to_string(f.runs) + " schedules, " + std::to_string(f.mismatches) +
              " mismatches, " + fmt(f.seconds) + " s"};
}

Outcome synchrony() {
  const auto& f = family();
  return {f.sync_violations == 0 && f.runs > 0,
          std::to_string(f.runs) + " runs, " + std::to_string(f.sync_violations) + " violations"};
}

// ---------------------------------------------------------------------------
// 3: CA correctness

Lattice from_bits(std::size_t bits, std::size_t n) {
  Lattice l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<CellValue>((bits >> i) & 1);
  return l;
}

Outcome ca_correctness() {
  const auto t0 = Clock::now();
  std::size_t violations = 0;
  std::size_t pairs = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto ca = fx::xor_ca(n);
    std::vector<Lattice> image(std::size_t{1} << n);
    for (std::size_t a = 0; a < image.size(); ++a) image[a] = ca_step(ca, from_bits(a, n));
    for (std::size_t a = 0; a < image.size(); ++a) {
      for (std::size_t b = 0; b < image.size(); ++b, ++pairs) {
        const auto& lhs = image[a ^ b];
        for (std::size_t i = 0; i < n; ++i) violations += lhs[i] != (image[a][i] ^ image[b][i]);
      }
    }
  }
  std::size_t fixpoints = 0;
  for (auto form : {RuleForm::xor_rule, RuleForm::identity, RuleForm::majority}) {
    std::size_t quiescent = 0;
    for (std::size_t q = 1; q <= 3; ++q) {
      std::vector<std::string> names;
      for (std::size_t v = 0; v < q; ++v) names.push_back(std::to_string(v));
      for (std::size_t width = 1; width <= 6; ++width) {
        const auto ca = make_ca("c", LatticeShape{names, width, 1, {}}, form);
        for (CellValue v = 0; v < q; ++v) {
          const std::size_t code = (static_cast<std::size_t>(v) * q + v) * q + v;
          if (ca.rule[code] != v) continue;  // v is not quiescent for this rule
          ++quiescent;
          ++fixpoints;
          violations += ca_step(ca, Lattice(width, v)) != Lattice(width, v);
        }
      }
    }
    violations += quiescent == 0;  // every built-in rule has a quiescent state
  }
  const double s = seconds_since(t0);
  return {violations == 0 && s < 5,
          std::to_string(pairs) + " linearity pairs, " + std::to_string(fixpoints) + " quiescent fixpoints, " +
              std::to_string(violations) + " violations, " + fmt(s) + " s"};
}

// ---------------------------------------------------------------------------
// 4: probabilistic agreement

ProbabilisticCellularAutomaton random_pca(ref::Rng& rng) {
  const auto q = static_cast<std::size_t>(ref::pick(rng, 2, 3));
  const auto width = static_cast<std::size_t>(ref::pick(rng, 1, 3));
  std::vector<std::string> names;
  for (std::size_t v = 0; v < q; ++v) names.push_back("v" + std::to_string(v));
  ProbabilisticCellularAutomaton p;
  p.name = "random";
  p.shape = LatticeShape{names, width, 1, {}};
  for (std::size_t code = 0; code < q * q * q; ++code) {
    std::vector<double> w(q);
    double total = 0;
    for (auto& x : w) total += x = ref::chance(rng, 0.3) ? 0.0 : std::uniform_real_distribution<double>(0.01, 1)(rng);
    if (total == 0) w[0] = total = 1;
    Distribution d;
    for (std::size_t v = 0; v < q; ++v) {
      if (w[v] > 0) d.emplace_back(static_cast<CellValue>(v), w[v] / total);
    }
    p.rule.push_back(d);
  }
  return p;
}

Outcome probabilistic_agreement() {
  const auto ma = fx::host_ma(fx::flip_pca());
  const auto init = ma_initial(ma, {0});
  const auto policy = InputPolicy::constant(Word{"t"});
  const auto target = Predicate::parse("lattice_has(1)");
  const double exact = *reach_probability_bounded(build_dtmc(ma, init, policy), target, 2).probability;
  const bool exact_ok = std::abs(exact - 0.75) < 1e-12;

  const auto t0 = Clock::now();
  const auto workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = reach_probability_mc(ma, init, policy, target, 2, 100'000, seed, workers);
    within += std::abs(*r.probability - 0.75) <= 0.01;
  }
  const double mc_seconds = seconds_since(t0);

  ref::Rng rng(404);
  std::size_t dtmcs = 0;
  std::size_t bad_rows = 0;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const auto pca = random_pca(rng);
    const auto host = fx::host_ma(pca, "random_host");
    const auto d = build_dtmc(host, ma_initial(host, Lattice(pca.shape.width, 0)), policy);
    ++dtmcs;
    for (const auto& row : d.rows) {
      double sum = 0;
      for (const auto& [t, p] : row) sum += p;
      worst = std::max(worst, std::abs(sum - 1));
      bad_rows += std::abs(sum - 1) > 1e-9;
    }
  }
  return {exact_ok && within >= 95 && mc_seconds < 30 && bad_rows == 0,
          "exact " + fmt(exact, 12) + ", MC within 0.01 for " + std::to_string(within) + "/100 seeds in " + fmt(mc_seconds) +
              " s, " + std::to_string(dtmcs) + " DTMCs with max row error " + fmt(worst * 1e12, 3) + "e-12"};
}

// ---------------------------------------------------------------------------
// 5: fault masking

std::vector<std::optional<Word>> voted_run(const MimicAutomaton& ma, const MimicConfiguration& init,
                                           const std::vector<Word>& schedule) {
  std::vector<MacroInput> sched(schedule.begin(), schedule.end());
  const auto run = ma_run(ma, init, sched);
  std::vector<std::optional<Word>> out;
  for (const auto& t : run.trace) out.push_back(observed_output(ma.root(), t));
  return out;
}

Outcome fault_masking() {
  const auto t0 = Clock::now();
  std::vector<SequentialAutomaton> faults{fx::flip_sa("flip"), fx::echo_variant("late", 3), fx::stuck_one("stuck")};
  ref::Rng rng(77);
  for (int i = 0; i < 5; ++i) {
    faults.push_back(ref::to_lib(ref::random_sa(rng, "rogue" + std::to_string(i), false, {"0", "1"}, {"0", "1"})));
  }
  auto stateful = fx::dhr3({fx::parity_bit("a"), fx::parity_bit("b", true), fx::parity_bit3("c")});
  auto rotating = fx::dhr3({fx::echo_variant("e1", 1), fx::echo_variant("e2", 2), fx::echo_variant("e3", 3)});
  rotating.scheduler = fx::shift3();
  const auto scheds = fx::schedules(3);

  std::size_t runs = 0;
  std::size_t violations = 0;
  for (const auto* d : {&stateful, &rotating}) {
    const auto healthy_ma = build_dhr(*d);
    const auto healthy_init = dhr_initial(healthy_ma, *d);
    std::vector<std::vector<std::optional<Word>>> healthy;
    for (const auto& s : scheds) healthy.push_back(voted_run(healthy_ma, healthy_init, s));
    for (std::size_t slot = 0; slot < 3; ++slot) {
      for (const auto& f : faults) {
        const auto faulty = inject_fault(*d, slot, f);
        const auto ma = build_dhr(faulty);
        const auto init = dhr_initial(ma, faulty);
        for (std::size_t i = 0; i < scheds.size(); ++i, ++runs) violations += voted_run(ma, init, scheds[i]) != healthy[i];
      }
    }
  }

  // Positive control: two identical faults outvote the healthy slot.
  const auto two = inject_fault(inject_fault(stateful, 0, fx::flip_sa("f")), 1, fx::flip_sa("f"));
  const auto two_ma = build_dhr(two);
  const auto healthy_ma = build_dhr(stateful);
  std::size_t changed = 0;
  for (const auto& s : scheds) {
    changed += voted_run(two_ma, dhr_initial(two_ma, two), s) != voted_run(healthy_ma, dhr_initial(healthy_ma, stateful), s);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && changed > 0 && secs < 30,
          std::to_string(runs) + " single-fault runs, " + std::to_string(violations) + " violations, double fault changed " +
              std::to_string(changed) + "/" + std::to_string(scheds.size()) + " schedules, " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 6: checker soundness and minimality

Outcome checker_soundness() {
  const auto t0 = Clock::now();
  auto a = chk::audit_generated(606, 400);

  // The example corpus: every invariant, reach and bad_prefix property of every model.
  for (const auto& file : {"parity.ma", "dhr.ma"}) {
    const auto doc = parse_files(std::vector<fs::path>{fx::model_path(file)});
    for (const auto& name : doc.model_names()) {
      const auto ma = ma_of(doc, name);
      const auto init = initial_of(doc, name, ma);
      const auto universe = universe_of(doc, name, ma);
      if (universe.empty()) continue;
      const auto ts = flatten(ma, init, universe);
      for (const auto& [pname, p] : doc.properties) {
        if (p.kind == PropertyKind::bad_prefix) {
          if (doc.sas.contains(p.pattern)) chk::audit_pattern(ma, ts, init, universe, doc.sas.at(p.pattern), 4, a);
        } else if (p.kind != PropertyKind::probability) {
          chk::audit_predicate(ma, ts, init, universe, Predicate::parse(p.predicate), 4, a);
        }
      }
    }
  }
  return {a.unsound == 0 && a.not_minimal == 0 && a.missed == 0 && a.counterexamples > 0,
          std::to_string(a.counterexamples) + " counterexamples/witnesses, " + std::to_string(a.unsound) + " unsound, " +
              std::to_string(a.not_minimal) + " non-minimal, " + std::to_string(a.missed) + " missed, " +
              fmt(seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------
// 7: detection

Outcome detection() {
  const auto t0 = Clock::now();
  const auto doc = parse_files(std::vector<fs::path>{fx::model_path("dhr.ma")});
  const auto sigs = load_signatures(std::vector<fs::path>{fx::source_dir() / "models" / "signatures"});
  bool ok = !sigs.empty();
  std::string detail;
  for (const auto& name : {"healthy", "planted"}) {
    const auto ma = ma_of(doc, name);
    const auto init = initial_of(doc, name, ma);
    const auto ts = flatten(ma, init, universe_of(doc, name, ma));
    const auto report = detect(ma, ts, sigs);
    const bool planted = std::string(name) == "planted";
    ok = ok && report.any() == planted;
    std::size_t replayed = 0;
    for (std::size_t i = 0; i < report.matches.size(); ++i) {
      const auto& m = report.matches[i];
      if (!m.matched) continue;
      MimicConfiguration end;
      std::vector<std::string> labels;
      const bool good = m.witness && chk::replays(ma, ts, *m.witness, end, labels) &&
                        sigs[i].pattern.is_final(chk::monitor(sigs[i].pattern, labels));
      ok = ok && good;
      replayed += good;
    }
    detail += std::string(name) + ": " + (report.any() ? "matched" : "clean") +
              (planted ? " (" + std::to_string(replayed) + " witness replayed)" : "") + ", ";
  }
  const double s = seconds_since(t0);
  return {ok && s < 10, detail + fmt(s) + " s"};
}

// ---------------------------------------------------------------------------
// 8: format round-trip, golden files and CLI exit codes

Outcome format_round_trip() {
  const auto t0 = Clock::now();
  ref::Generator gen(808);
  std::mt19937_64 rng(8);
  std::size_t docs_ok = 0;
  const std::size_t total = 600;
  for (std::size_t i = 0; i < total; ++i) docs_ok += docs::round_trips(docs::random_document(gen, rng), rng);

  std::size_t corpus_ok = 0;
  const auto files = fx::corpus();
  for (const auto& f : files) {
    auto r = try_parse(fx::slurp(f), f.string());
    corpus_ok += r.document && docs::round_trips(*r.document, rng);
  }

  const auto golden_doc = parse_files(std::vector<fs::path>{fx::model_path("parity.ma")});
  bool golden = serialize(golden_doc) == fx::slurp(fx::source_dir() / "tests" / "golden" / "parity_ma.txt");

  struct Case {
    std::string args;
    int code;
  };
  const auto parity = fx::quoted_model("parity.ma");
  const auto dhr = fx::quoted_model("dhr.ma");
  const auto flip = fx::quoted_model("flip.ma");
  const auto sigs = fx::quoted_signatures();
  const std::vector<Case> matrix{
      {"validate " + parity + " " + flip + " " + dhr, 0},
      {"check " + parity + " --model parity_ma --property always_even --format json", 1},
      {"check " + parity + " --model parity_ma --property odd_reachable", 0},
      {"check " + parity + " --model parity_ma --property always_even --bound 1", 2},
      {"check " + parity + " --model missing --property always_even", 3},
      {"check " + flip + " --model flip_ma --property one_within_two", 0},
      {"simulate " + parity + " --model parity_ma --steps 0 --format json", 0},
      {"detect " + dhr + " --model healthy --signatures " + sigs, 0},
      {"detect " + dhr + " --model planted --signatures " + sigs, 1},
      {"detect " + dhr + " --model planted --signatures " + sigs + " --bound 0", 2},
  };
  std::size_t cli_ok = 0;
  for (const auto& c : matrix) cli_ok += fx::run_cli(c.args).code == c.code;

  // Counterexample of length 1 in JSON, and the JSON shape against its golden file.
  const auto check = fx::run_cli(matrix[1].args);
  const auto j = nlohmann::json::parse(check.out, nullptr, false);
  std::size_t cx_len = 0;
  if (!j.is_discarded()) {
    for (const auto& step : j["counterexample"]) cx_len += step.contains("input");
  }
  const auto json_golden = nlohmann::json::parse(fx::slurp(fx::source_dir() / "tests" / "golden" / "check_always_even.json"), nullptr, false);
  golden = golden && !j.is_discarded() && j == json_golden;
  const bool json_ok = cx_len == 1;

  return {docs_ok == total && corpus_ok == files.size() && golden && cli_ok == matrix.size() && json_ok,
          std::to_string(docs_ok) + "/" + std::to_string(total) + " generated, " + std::to_string(corpus_ok) + "/" +
              std::to_string(files.size()) + " corpus files, golden " + (golden ? "stable" : "DIFFERS") + ", CLI " +
              std::to_string(cli_ok) + "/" + std::to_string(matrix.size()) + " exit codes, JSON counterexample length " +
              std::to_string(cx_len) + ", " + fmt(seconds_since(t0)) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence}, {"synchrony", synchrony},
      {"CA correctness", ca_correctness},         {"probabilistic agreement", probabilistic_agreement},
      {"fault masking", fault_masking},           {"checker soundness", checker_soundness},
      {"detection", detection},                   {"format round-trip", format_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

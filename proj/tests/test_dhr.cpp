#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "mimic/dhr.hpp"

using namespace mimic;

namespace {

using fx::echo_variant;
using fx::parity_bit;
using fx::parity_bit3;
using fx::shift3;
using fx::schedules;
using fx::tag_sa;

std::vector<std::optional<Word>> voted(const std::vector<DhrStepReport>& reports) {
  std::vector<std::optional<Word>> out;
  for (const auto& r : reports) out.push_back(r.voted_output);
  return out;
}

}  // namespace

TEST_CASE("triple-redundant parity equals a single run fanned out") {
  auto d = fx::dhr3({fx::parity_sa("p0"), fx::parity_sa("p1"), fx::parity_sa("p2")});
  CHECK(validate(d).empty());
  const auto ma = build_dhr(d);
  CHECK(validate(ma).empty());
  CHECK(ma.root().voter.has_value());
  CHECK(!ma.metadata.empty());
  for (const auto& w : fx::all_words({"0", "1"}, 4)) {
    auto cfg = dhr_initial(ma, d);
    auto step = ma_macro_step_sa_from_ca(ma, cfg, w);
    const auto single = sa_run(fx::parity_sa(), w);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(step.tick.cells[i].result.output_word == single.output_word);
      CHECK(step.tick.cells[i].result.final_state == single.final_state);
    }
    CHECK(step.tick.vote->voted == single.output_word);
  }
}

TEST_CASE("width-1 DHR degenerates to its single executor") {
  DhrStructure d;
  d.name = "solo";
  d.executors = {fx::parity_sa()};
  d.scheduler = fx::identity_ca({"only"}, 1);
  d.initial_lattice = {0};
  const auto sched = fx::all_words({"0", "1"}, 2, 1);
  auto reports = dhr_run(d, sched);
  StateId s = 0;
  const auto sa = fx::parity_sa();
  for (std::size_t t = 0; t < sched.size(); ++t) {
    auto r = sa_run_from(sa, s, sched[t]);
    CHECK(reports[t].voted_output == r.output_word);
    CHECK(reports[t].lattice_after == Lattice{0});
  }
}

TEST_CASE("PCA scheduler: lattices are seed-determined") {
  DhrStructure d;
  d.name = "random";
  d.executors = {tag_sa("a"), tag_sa("b"), tag_sa("c")};
  ProbabilisticCellularAutomaton p;
  p.name = "uniform";
  p.shape = LatticeShape{{"a", "b", "c"}, 3, 1, {}};
  p.rule.assign(27, Distribution{{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}});
  d.scheduler = p;
  d.initial_lattice = {0, 1, 2};
  CHECK(validate(d).empty());
  const std::vector<Word> sched(8, Word{"1"});
  auto r1 = dhr_run(d, sched, 5);
  auto r2 = dhr_run(d, sched, 5);
  CHECK(r1 == r2);
  bool differs = false;
  for (std::uint64_t seed = 6; seed < 16 && !differs; ++seed) differs = dhr_run(d, sched, seed) != r1;
  CHECK(differs);
  // Slot outputs always follow the lattice the tick started from.
  for (const auto& r : r1) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.per_slot_outputs[i] == Word{p.shape.cell_states[r.lattice_before[i]]});
  }
}

TEST_CASE("dhr_step voting cases") {
  auto unanimous = fx::dhr3({fx::constant_sa("x", "A"), fx::constant_sa("y", "A"), fx::constant_sa("z", "A")});
  auto [s1, r1] = dhr_step(unanimous, dhr_initial(build_dhr(unanimous), unanimous), {"0"});
  CHECK(r1.voted_output == Word{"A"});
  CHECK(r1.dissenters.empty());

  auto split = fx::dhr3({fx::constant_sa("x", "A"), fx::constant_sa("y", "A"), fx::constant_sa("z", "B")});
  auto [s2, r2] = dhr_step(split, dhr_initial(build_dhr(split), split), {"0"});
  CHECK(r2.voted_output == Word{"A"});
  CHECK(r2.dissenters == std::vector<std::size_t>{2});

  auto three = fx::dhr3({fx::constant_sa("x", "A", {"A", "B", "C"}), fx::constant_sa("y", "B", {"A", "B", "C"}),
                         fx::constant_sa("z", "C", {"A", "B", "C"})});
  auto [s3, r3] = dhr_step(three, dhr_initial(build_dhr(three), three), {"0"});
  CHECK_FALSE(r3.voted_output.has_value());
  CHECK(r3.dissenters.empty());
}

TEST_CASE("vote policies") {
  const VoterPolicy strict{VoterKind::strict_majority, 2, {}};
  CHECK(vote(strict, {{"A"}, {"A"}, {"B"}}).voted == Word{"A"});
  CHECK(vote(strict, {{"A"}, {"B"}, {"C"}}).abstained());
  const VoterPolicy low{VoterKind::strict_majority, 1, {}};
  CHECK(vote(low, {{"A"}, {"B"}, {"A"}, {"C"}}).voted == Word{"A"});
  CHECK(vote(low, {{"A"}, {"B"}}).abstained());
  const VoterPolicy plural{VoterKind::plurality_with_tiebreak, 1, {{"B"}, {"A"}}};
  CHECK(vote(plural, {{"A"}, {"B"}}).voted == Word{"B"});
  CHECK(vote(plural, {{"A"}, {"B"}}).dissenters == std::vector<std::size_t>{0});
  CHECK(vote(plural, {{"C"}, {"D"}}).abstained());
  CHECK(VoterPolicy{}.effective_quorum(5) == 3);
}

TEST_CASE("inject_fault") {
  auto d = fx::dhr3({parity_bit("a"), parity_bit("b", true), parity_bit3("c")});
  REQUIRE(validate(d).empty());
  auto faulty = inject_fault(d, 1, fx::flip_sa("bad"));
  CHECK(validate(faulty).empty());
  CHECK(shape_of(faulty.scheduler).cell_states.size() == 4);
  auto healthy = dhr_run(d, std::vector<Word>{{"1", "0"}});
  auto masked = dhr_run(faulty, std::vector<Word>{{"1", "0"}});
  CHECK(masked[0].voted_output == healthy[0].voted_output);
  CHECK(masked[0].dissenters == std::vector<std::size_t>{1});

  DhrStructure solo;
  solo.name = "solo";
  solo.executors = {parity_bit("a")};
  solo.scheduler = fx::identity_ca({"only"}, 1);
  solo.initial_lattice = {0};
  auto broken = dhr_run(inject_fault(solo, 0, fx::flip_sa("bad")), std::vector<Word>{{"1", "1"}});
  CHECK(broken[0].voted_output == Word{"0", "0"});

  auto two = inject_fault(inject_fault(d, 0, fx::flip_sa("bad")), 2, fx::flip_sa("bad"));
  auto captured = dhr_run(two, std::vector<Word>{{"1", "0"}});
  CHECK(captured[0].voted_output == Word{"0", "1"});
  CHECK(healthy[0].voted_output == Word{"1", "1"});

  CHECK_THROWS(inject_fault(d, 3, fx::flip_sa("bad")));
  CHECK_THROWS(inject_fault(d, 0, fx::constant_sa("alien", "A")));
}

TEST_CASE("single faults are masked, double faults are not") {
  const std::vector<SequentialAutomaton> faults{fx::flip_sa("flip"), echo_variant("late", 3), fx::stuck_one("stuck1")};
  auto stateful = fx::dhr3({parity_bit("a"), parity_bit("b", true), parity_bit3("c")});
  auto rotating = fx::dhr3({echo_variant("e1", 1), echo_variant("e2", 2), echo_variant("e3", 3)});
  rotating.scheduler = shift3();
  const auto scheds = schedules(2);
  std::size_t runs = 0;
  for (const auto* d : {&stateful, &rotating}) {
    REQUIRE(validate(*d).empty());
    for (const auto& s : scheds) {
      const auto healthy = voted(dhr_run(*d, s));
      for (std::size_t slot = 0; slot < 3; ++slot) {
        for (const auto& f : faults) {
          CHECK(voted(dhr_run(inject_fault(*d, slot, f), s)) == healthy);
          ++runs;
        }
      }
    }
  }
  CHECK(runs > 1000);

  bool changed = false;
  for (const auto& s : scheds) {
    const auto healthy = voted(dhr_run(stateful, s));
    auto two = inject_fault(inject_fault(stateful, 0, fx::flip_sa("f")), 1, fx::flip_sa("f"));
    changed = changed || voted(dhr_run(two, s)) != healthy;
  }
  CHECK(changed);
}

TEST_CASE("voted words come from at least quorum slots") {
  auto d = fx::dhr3({parity_bit("a"), fx::flip_sa("f"), echo_variant("e", 2)}, 2);
  for (const auto& s : schedules(2)) {
    for (const auto& r : dhr_run(d, s)) {
      if (!r.voted_output) {
        CHECK(r.dissenters.empty());
        continue;
      }
      std::size_t agree = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        const bool same = r.per_slot_outputs[i] == *r.voted_output;
        agree += same;
        CHECK(same != (std::find(r.dissenters.begin(), r.dissenters.end(), i) != r.dissenters.end()));
      }
      CHECK(agree >= 2);
    }
  }
}

TEST_CASE("dhr_run edge cases") {
  auto d = fx::dhr3({parity_bit("a"), parity_bit("b", true), parity_bit3("c")});
  CHECK(dhr_run(d, std::vector<Word>{}).empty());
  const std::vector<Word> s{{"1"}, {"0", "1"}, {}};
  CHECK(dhr_run(d, s) == dhr_run(d, s));
}

TEST_CASE("serial composition feeds votes forward") {
  auto a = fx::dhr3({parity_bit("a"), parity_bit("b", true), parity_bit3("c")});
  a.name = "first";
  auto b = a;
  b.name = "second";
  SerialDhr s{"chain", {a, b}};
  CHECK(validate(s).empty());
  const auto ma = compose_serial(s);
  CHECK(validate(ma).empty());

  for (const auto& sched : schedules(2)) {
    auto run = dhr_run(s, sched);
    REQUIRE(run.steps.size() == sched.size());
    const auto first = dhr_run(a, sched);
    std::vector<Word> forwarded;
    for (const auto& r : first) forwarded.push_back(*r.voted_output);
    const auto second = dhr_run(b, forwarded);
    for (std::size_t t = 0; t < sched.size(); ++t) {
      REQUIRE(run.steps[t].stages.size() == 2);
      CHECK(run.steps[t].stages[0].voted_output == first[t].voted_output);
      CHECK(run.steps[t].stages[1].input_block == forwarded[t]);
      CHECK(run.steps[t].output == second[t].voted_output);
    }
  }

  const std::vector<Word> one{{"1"}};
  const auto healthy = dhr_run(s, one);
  SerialDhr mixed{"mixed", {a, inject_fault(b, 2, fx::flip_sa("bad"))}};
  CHECK(dhr_run(mixed, one).steps[0].output == healthy.steps[0].output);

  CHECK_FALSE(validate(SerialDhr{"short", {a}}).empty());
  CHECK_THROWS(compose_serial(SerialDhr{"short", {a}}));

  auto letters = fx::dhr3({fx::constant_sa("x", "A"), fx::constant_sa("y", "A"), fx::constant_sa("z", "A")});
  bool chaining = false;
  for (const auto& v : validate(SerialDhr{"bad", {letters, a}})) chaining = chaining || v.invariant == "alphabet_chaining";
  CHECK(chaining);
}

TEST_CASE("a stage that abstains aborts the serial run") {
  auto a = fx::dhr3({fx::echo_sa("a"), fx::flip_sa("b"), fx::echo_sa("c")}, 3);
  auto b = fx::dhr3({fx::echo_sa("d"), fx::echo_sa("e"), fx::echo_sa("f")});
  a.name = "voting";
  b.name = "relay";
  b.scheduler = fx::identity_ca({"x", "y", "z"}, 3);
  std::get<CellularAutomaton>(b.scheduler).name = "relay_slots";
  SerialDhr s{"abstaining", {a, b}};
  REQUIRE(validate(s).empty());
  auto run = dhr_run(s, std::vector<Word>{{"1"}, {"0"}});
  CHECK(run.aborted);
  REQUIRE(run.steps.size() == 1);
  CHECK(run.steps[0].stages.size() == 1);
  CHECK_FALSE(run.steps[0].output.has_value());
}

#include <algorithm>

#include "mimic/automata.hpp"

namespace mimic {

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? npos : static_cast<std::size_t>(it - names.begin());
}

bool SequentialAutomaton::is_final(StateId s) const {
  return std::binary_search(finals.begin(), finals.end(), s);
}

SaBuilder::SaBuilder(std::string name) : name_(std::move(name)) {}

SaBuilder& SaBuilder::states(std::vector<std::string> s) {
  states_ = std::move(s);
  return *this;
}
SaBuilder& SaBuilder::initial(std::string s) {
  initial_ = std::move(s);
  return *this;
}
SaBuilder& SaBuilder::finals(std::vector<std::string> f) {
  finals_ = std::move(f);
  return *this;
}
SaBuilder& SaBuilder::inputs(std::vector<std::string> a) {
  inputs_ = std::move(a);
  return *this;
}
SaBuilder& SaBuilder::outputs(std::vector<std::string> o) {
  outputs_ = std::move(o);
  return *this;
}
SaBuilder& SaBuilder::partial(bool p) {
  partial_ = p;
  return *this;
}
SaBuilder& SaBuilder::on(std::string from, std::string symbol, std::string to, std::optional<std::string> output) {
  edges_.push_back({std::move(from), std::move(symbol), std::move(to), std::move(output)});
  return *this;
}

SequentialAutomaton SaBuilder::build_unchecked() const {
  SequentialAutomaton sa;
  sa.name = name_;
  sa.states = states_;
  sa.inputs = inputs_;
  sa.outputs = outputs_ ? *outputs_ : states_;
  sa.partial = partial_;
  sa.initial = sa.state_index(initial_);
  for (const auto& f : finals_) sa.finals.push_back(sa.state_index(f));
  std::sort(sa.finals.begin(), sa.finals.end());
  sa.finals.erase(std::unique(sa.finals.begin(), sa.finals.end()), sa.finals.end());
  sa.next.assign(sa.states.size() * sa.inputs.size(), npos);
  sa.out.assign(sa.next.size(), npos);
  for (const auto& e : edges_) {
    const auto s = sa.state_index(e.from);
    const auto a = sa.input_index(e.symbol);
    if (s == npos || a == npos) {
      throw ValidationError({{"reference", "(" + e.from + ", " + e.symbol + ")", "unknown state or input symbol"}});
    }
    sa.next[sa.slot(s, a)] = sa.state_index(e.to);
    sa.out[sa.slot(s, a)] = sa.output_index(e.output ? *e.output : e.to);
  }
  return sa;
}

SequentialAutomaton SaBuilder::build() const {
  auto sa = build_unchecked();
  if (auto report = validate(sa); !report.empty()) throw ValidationError(std::move(report));
  return sa;
}

SaStep sa_step(const SequentialAutomaton& sa, StateId state, SymbolId symbol) {
  if (state >= sa.states.size() || symbol >= sa.inputs.size()) {
    throw std::out_of_range("sa_step: state or symbol outside '" + sa.name + "'");
  }
  const auto k = sa.slot(state, symbol);
  if (sa.next[k] == npos) {
    throw StuckError("'" + sa.name + "' has no transition from " + sa.states[state] + " on " + sa.inputs[symbol]);
  }
  return {sa.next[k], sa.out[k]};
}

std::pair<std::string, std::string> sa_step(const SequentialAutomaton& sa, std::string_view state,
                                            std::string_view symbol) {
  const auto s = sa.state_index(state);
  if (s == npos) throw std::out_of_range("sa_step: unknown state '" + std::string(state) + "'");
  const auto a = sa.input_index(symbol);
  if (a == npos) throw InputRejected(std::string(symbol), 0);
  const auto r = sa_step(sa, s, a);
  return {sa.states[r.state], sa.outputs[r.output]};
}

RunResult sa_run_from(const SequentialAutomaton& sa, StateId& state, std::span<const std::string> input,
                      std::optional<std::size_t> cell) {
  RunResult r;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto a = sa.input_index(input[i]);
    if (a == npos) throw InputRejected(input[i], i, cell);
    const auto k = sa.slot(state, a);
    if (sa.next[k] == npos) {
      r.stuck = true;
      break;
    }
    r.output_word.push_back(sa.outputs[sa.out[k]]);
    state = sa.next[k];
    ++r.steps;
  }
  r.final_state = sa.states[state];
  r.accepted = !r.stuck && sa.is_final(state);
  return r;
}

RunResult sa_run(const SequentialAutomaton& sa, std::span<const std::string> input) {
  StateId s = sa.initial;
  return sa_run_from(sa, s, input);
}

}  // namespace mimic

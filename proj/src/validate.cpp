#include <cmath>
#include <set>

#include "mimic/automata.hpp"

namespace mimic {

namespace {

void check_names(const std::vector<std::string>& names, const std::string& what, const std::string& owner,
                 ValidationReport& report) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) report.push_back({"name", owner, "empty " + what + " name"});
    if (!seen.insert(n).second) report.push_back({"unique_names", owner + "." + n, "duplicate " + what});
  }
}

void validate_shape(const LatticeShape& shape, const std::string& owner, ValidationReport& report) {
  if (shape.cell_states.empty()) report.push_back({"cell_states", owner, "Q is empty"});
  check_names(shape.cell_states, "cell state", owner, report);
  if (shape.width < 1) report.push_back({"width", owner, "width must be >= 1"});
  if (shape.radius < 1) report.push_back({"radius", owner, "radius must be >= 1"});
  if (shape.boundary.kind == BoundaryKind::fixed && shape.boundary.value >= shape.cell_states.size()) {
    report.push_back({"boundary", owner, "fixed boundary value outside Q"});
  }
}

std::string neighborhood_name(const LatticeShape& shape, std::size_t code) {
  std::string s = "(";
  const auto nb = shape.decode_neighborhood(code);
  for (std::size_t i = 0; i < nb.size(); ++i) s += (i ? " " : "") + shape.cell_states[nb[i]];
  return s + ")";
}

}  // namespace

ValidationReport validate(const SequentialAutomaton& sa) {
  ValidationReport report;
  const auto& owner = sa.name;
  if (sa.states.empty()) report.push_back({"states", owner, "no states"});
  check_names(sa.states, "state", owner, report);
  check_names(sa.inputs, "input symbol", owner, report);
  check_names(sa.outputs, "output symbol", owner, report);
  if (sa.initial >= sa.states.size()) report.push_back({"initial", owner, "initial state is not a state"});
  for (auto f : sa.finals) {
    if (f >= sa.states.size()) report.push_back({"finals", owner, "final state is not a state"});
  }
  const auto cells = sa.states.size() * sa.inputs.size();
  if (sa.next.size() != cells || sa.out.size() != cells) {
    report.push_back({"table_shape", owner, "transition table does not match |states| x |inputs|"});
    return report;
  }
  for (StateId s = 0; s < sa.states.size(); ++s) {
    for (SymbolId a = 0; a < sa.inputs.size(); ++a) {
      const auto k = sa.slot(s, a);
      const auto element = "(" + sa.states[s] + ", " + sa.inputs[a] + ")";
      if (sa.next[k] == npos) {
        if (!sa.partial) report.push_back({"totality", element, "missing transition in '" + owner + "'"});
        continue;
      }
      if (sa.next[k] >= sa.states.size()) report.push_back({"target", element, "transition target is not a state"});
      if (sa.out[k] >= sa.outputs.size()) {
        report.push_back({"output", element, "output symbol outside the output alphabet of '" + owner + "'"});
      }
    }
  }
  return report;
}

ValidationReport validate(const CellularAutomaton& ca) {
  ValidationReport report;
  validate_shape(ca.shape, ca.name, report);
  if (!report.empty()) return report;
  const auto count = ca.shape.neighborhood_count();
  if (count == npos) {
    report.push_back({"rule_size", ca.name, "rule table would exceed " + std::to_string(kMaxRuleTable) + " entries"});
    return report;
  }
  if (ca.rule.size() != count) {
    report.push_back({"rule_total", ca.name,
                      "rule defines " + std::to_string(ca.rule.size()) + " of " + std::to_string(count) +
                          " neighborhoods"});
    return report;
  }
  for (std::size_t code = 0; code < count; ++code) {
    if (ca.rule[code] >= ca.shape.cell_states.size()) {
      report.push_back({"rule_range", neighborhood_name(ca.shape, code), "rule result outside Q in '" + ca.name + "'"});
    }
  }
  return report;
}

ValidationReport validate(const ProbabilisticCellularAutomaton& pca) {
  ValidationReport report;
  validate_shape(pca.shape, pca.name, report);
  if (!report.empty()) return report;
  const auto count = pca.shape.neighborhood_count();
  if (count == npos) {
    report.push_back({"rule_size", pca.name, "rule table would exceed " + std::to_string(kMaxRuleTable) + " entries"});
    return report;
  }
  if (pca.rule.size() != count) {
    report.push_back({"rule_total", pca.name,
                      "rule defines " + std::to_string(pca.rule.size()) + " of " + std::to_string(count) +
                          " neighborhoods"});
    return report;
  }
  for (std::size_t code = 0; code < count; ++code) {
    const auto& d = pca.rule[code];
    double sum = 0.0;
    bool ok = !d.empty();
    for (const auto& [v, p] : d) {
      if (v >= pca.shape.cell_states.size()) ok = false;
      if (!(p >= 0.0)) ok = false;
      sum += p;
    }
    if (!ok) {
      report.push_back({"distribution", neighborhood_name(pca.shape, code),
                        "empty distribution, negative mass or state outside Q in '" + pca.name + "'"});
    } else if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      report.push_back({"normalization", neighborhood_name(pca.shape, code),
                        "probabilities sum to " + std::to_string(sum) + " in '" + pca.name + "'"});
    }
  }
  return report;
}

ValidationReport validate(const HierarchicalAutomaton& ha) {
  ValidationReport report;
  std::vector<std::string> names;
  for (const auto& sa : ha.sas) {
    names.push_back(sa.name);
    for (auto v : validate(sa)) report.push_back(std::move(v));
  }
  check_names(names, "automaton", ha.name, report);
  if (ha.root >= ha.sas.size()) {
    report.push_back({"root", ha.name, "root is not a member automaton"});
    return report;
  }
  std::vector<std::size_t> in_images(ha.sas.size(), 0);
  for (const auto& [key, children] : ha.gamma) {
    const auto& [sa, state] = key;
    if (sa >= ha.sas.size() || state >= ha.sas[sa].states.size()) {
      report.push_back({"gamma_domain", ha.name, "composition function keyed by an unknown (sa, state)"});
      continue;
    }
    for (auto c : children) {
      if (c >= ha.sas.size()) {
        report.push_back({"gamma_target", ha.sas[sa].name + "." + ha.sas[sa].states[state],
                          "refinement is not a member automaton"});
        continue;
      }
      ++in_images[c];
    }
  }
  for (std::size_t i = 0; i < ha.sas.size(); ++i) {
    if (i == ha.root && in_images[i] != 0) {
      report.push_back({"tree", ha.sas[i].name, "root appears as a refinement"});
    } else if (i != ha.root && in_images[i] != 1) {
      report.push_back({"tree", ha.sas[i].name,
                        "appears in " + std::to_string(in_images[i]) + " composition images (expected 1)"});
    }
  }
  if (!report.empty()) return report;
  // With one parent each, a cycle shows up as an automaton unreachable from the root.
  std::vector<bool> seen(ha.sas.size(), false);
  std::vector<std::size_t> work{ha.root};
  seen[ha.root] = true;
  while (!work.empty()) {
    auto sa = work.back();
    work.pop_back();
    for (const auto& [key, children] : ha.gamma) {
      if (key.first != sa) continue;
      for (auto c : children) {
        if (!seen[c]) {
          seen[c] = true;
          work.push_back(c);
        }
      }
    }
  }
  for (std::size_t i = 0; i < ha.sas.size(); ++i) {
    if (!seen[i]) report.push_back({"tree", ha.sas[i].name, "refinement cycle (unreachable from the root)"});
  }
  return report;
}

}  // namespace mimic

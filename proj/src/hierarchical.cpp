#include <algorithm>
#include <deque>

#include "mimic/automata.hpp"

namespace mimic {

std::size_t HierarchicalAutomaton::sa_index(std::string_view sa_name) const {
  for (std::size_t i = 0; i < sas.size(); ++i) {
    if (sas[i].name == sa_name) return i;
  }
  return npos;
}

const std::vector<std::size_t>& HierarchicalAutomaton::refinements(std::size_t sa, StateId state) const {
  static const std::vector<std::size_t> none;
  auto it = gamma.find({sa, state});
  return it == gamma.end() ? none : it->second;
}

std::vector<std::size_t> HierarchicalAutomaton::parents() const {
  std::vector<std::size_t> parent(sas.size(), npos);
  for (const auto& [key, children] : gamma) {
    for (auto c : children) {
      if (c < parent.size()) parent[c] = key.first;
    }
  }
  return parent;
}

std::vector<std::size_t> HierarchicalAutomaton::depths() const {
  const auto parent = parents();
  std::vector<std::size_t> depth(sas.size(), 0);
  for (std::size_t i = 0; i < sas.size(); ++i) {
    std::size_t d = 0;
    for (auto p = parent[i]; p != npos && d <= sas.size(); p = parent[p]) ++d;
    depth[i] = d;
  }
  return depth;
}

namespace {

/// Activates `sa` at its initial state and closes over initial refinements.
void enter(const HierarchicalAutomaton& ha, std::size_t sa, StateId state, HaConfiguration& config) {
  std::deque<std::pair<std::size_t, StateId>> work{{sa, state}};
  while (!work.empty()) {
    auto [s, q] = work.front();
    work.pop_front();
    config.active[s] = q;
    for (auto child : ha.refinements(s, q)) work.emplace_back(child, ha.sas[child].initial);
  }
}

void drop_descendants(const HierarchicalAutomaton& ha, std::size_t sa, HaConfiguration& config) {
  auto it = config.active.find(sa);
  if (it == config.active.end()) return;
  for (auto child : ha.refinements(sa, it->second)) {
    drop_descendants(ha, child, config);
    config.active.erase(child);
  }
}

}  // namespace

HaConfiguration ha_initial(const HierarchicalAutomaton& ha) {
  HaConfiguration config;
  enter(ha, ha.root, ha.sas[ha.root].initial, config);
  return config;
}

HaStep ha_step(const HierarchicalAutomaton& ha, const HaConfiguration& config, std::string_view symbol) {
  const auto depth = ha.depths();
  bool known = false;
  std::size_t best_depth = npos;
  for (const auto& [sa, state] : config.active) {
    const auto& m = ha.sas[sa];
    const auto a = m.input_index(symbol);
    if (a == npos) continue;
    known = true;
    if (m.next[m.slot(state, a)] != npos) best_depth = std::min(best_depth, depth[sa]);
  }
  if (!known) throw InputRejected(std::string(symbol), 0);
  if (best_depth == npos) {
    throw StuckError("no active automaton of '" + ha.name + "' is enabled on " + std::string(symbol));
  }

  HaStep step{config, {}};
  for (const auto& [sa, state] : config.active) {
    if (depth[sa] != best_depth) continue;
    const auto& m = ha.sas[sa];
    const auto a = m.input_index(symbol);
    if (a == npos) continue;
    const auto k = m.slot(state, a);
    if (m.next[k] == npos) continue;
    step.fired.push_back({sa, state, m.next[k], m.out[k]});
  }
  // SAs at one depth head disjoint subtrees, so applying the firings in order is order-independent.
  for (const auto& f : step.fired) {
    if (f.to == f.from) continue;
    drop_descendants(ha, f.sa, step.config);
    enter(ha, f.sa, f.to, step.config);
  }
  return step;
}

ValidationReport check_configuration(const HierarchicalAutomaton& ha, const HaConfiguration& config) {
  ValidationReport report;
  if (!config.active.contains(ha.root)) report.push_back({"root_active", ha.name, "root is not active"});
  // The active set must equal the closure from the root under the current states.
  std::vector<std::size_t> expected;
  std::deque<std::size_t> work;
  if (config.active.contains(ha.root)) work.push_back(ha.root);
  while (!work.empty()) {
    auto sa = work.front();
    work.pop_front();
    expected.push_back(sa);
    auto it = config.active.find(sa);
    if (it == config.active.end()) {
      report.push_back({"refinement_active", ha.sas[sa].name, "refinement of an active state is inactive"});
      continue;
    }
    if (it->second >= ha.sas[sa].states.size()) {
      report.push_back({"state_range", ha.sas[sa].name, "state index out of range"});
      continue;
    }
    for (auto child : ha.refinements(sa, it->second)) work.push_back(child);
  }
  for (const auto& [sa, state] : config.active) {
    if (std::find(expected.begin(), expected.end(), sa) == expected.end()) {
      report.push_back({"spurious_active", sa < ha.sas.size() ? ha.sas[sa].name : std::to_string(sa),
                        "active outside the refinement closure"});
    }
  }
  return report;
}

}  // namespace mimic

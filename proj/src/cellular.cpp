#include <algorithm>
#include <cmath>

#include "mimic/automata.hpp"

namespace mimic {

std::string_view to_string(RuleForm f) {
  switch (f) {
    case RuleForm::table: return "table";
    case RuleForm::xor_rule: return "xor";
    case RuleForm::identity: return "identity";
    case RuleForm::majority: return "majority";
    case RuleForm::constant: return "constant";
  }
  return "table";
}

std::optional<RuleForm> rule_form_from(std::string_view s) {
  if (s == "xor") return RuleForm::xor_rule;
  if (s == "identity") return RuleForm::identity;
  if (s == "majority") return RuleForm::majority;
  return std::nullopt;
}

std::string_view to_string(Termination t) { return t == Termination::fixpoint ? "fixpoint" : "step_cap"; }

std::size_t LatticeShape::neighborhood_count() const {
  const std::size_t q = cell_states.size();
  if (q == 0) return 0;
  std::size_t n = 1;
  for (std::size_t i = 0; i < arity(); ++i) {
    if (n > kMaxRuleTable / q) return npos;
    n *= q;
  }
  return n;
}

std::size_t LatticeShape::neighborhood_code(const Lattice& lattice, std::size_t cell) const {
  const auto q = cell_states.size();
  const auto n = static_cast<long long>(width);
  std::size_t code = 0;
  for (long long off = -static_cast<long long>(radius); off <= static_cast<long long>(radius); ++off) {
    long long j = static_cast<long long>(cell) + off;
    CellValue v;
    if (j >= 0 && j < n) {
      v = lattice[static_cast<std::size_t>(j)];
    } else if (boundary.kind == BoundaryKind::periodic) {
      v = lattice[static_cast<std::size_t>(((j % n) + n) % n)];
    } else {
      v = boundary.value;
    }
    code = code * q + v;
  }
  return code;
}

std::vector<CellValue> LatticeShape::decode_neighborhood(std::size_t code) const {
  const auto q = cell_states.size();
  std::vector<CellValue> cells(arity());
  for (std::size_t i = arity(); i-- > 0;) {
    cells[i] = static_cast<CellValue>(code % q);
    code /= q;
  }
  return cells;
}

void LatticeShape::check_lattice(const Lattice& lattice) const {
  if (lattice.size() != width) {
    throw DimensionError("lattice has " + std::to_string(lattice.size()) + " cells, expected " +
                         std::to_string(width));
  }
  for (auto v : lattice) {
    if (v >= cell_states.size()) throw DimensionError("lattice cell value " + std::to_string(v) + " outside Q");
  }
}

std::vector<CellValue> builtin_rule_table(const LatticeShape& shape, RuleForm form) {
  const auto count = shape.neighborhood_count();
  if (count == npos || count == 0) throw SizeLimitError("rule table for this shape is empty or too large");
  const auto q = static_cast<CellValue>(shape.cell_states.size());
  const auto center = shape.radius;
  std::vector<CellValue> table(count);
  for (std::size_t code = 0; code < count; ++code) {
    const auto nb = shape.decode_neighborhood(code);
    switch (form) {
      case RuleForm::identity:
        table[code] = nb[center];
        break;
      case RuleForm::xor_rule: {
        std::size_t sum = 0;
        for (std::size_t i = 0; i < nb.size(); ++i) {
          if (i != center) sum += nb[i];
        }
        table[code] = static_cast<CellValue>(sum % q);
        break;
      }
      case RuleForm::majority: {
        std::vector<std::size_t> freq(q, 0);
        for (auto v : nb) ++freq[v];
        const auto best = *std::max_element(freq.begin(), freq.end());
        CellValue pick = nb[center];
        if (freq[pick] != best) pick = static_cast<CellValue>(std::find(freq.begin(), freq.end(), best) - freq.begin());
        table[code] = pick;
        break;
      }
      default:
        throw UsageError("not a built-in deterministic rule: " + std::string(to_string(form)));
    }
  }
  return table;
}

CellularAutomaton make_ca(std::string name, LatticeShape shape, RuleForm form) {
  CellularAutomaton ca{std::move(name), std::move(shape), {}, form};
  ca.rule = builtin_rule_table(ca.shape, form);
  return ca;
}

Lattice ca_step(const CellularAutomaton& ca, const Lattice& lattice) {
  ca.shape.check_lattice(lattice);
  Lattice next(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) next[i] = ca.rule[ca.shape.neighborhood_code(lattice, i)];
  return next;
}

CaRun ca_run(const CellularAutomaton& ca, const Lattice& lattice, std::size_t t_max) {
  CaRun run;
  run.trace.push_back(lattice);
  for (std::size_t t = 0; t < t_max; ++t) {
    auto next = ca_step(ca, run.trace.back());
    if (next == run.trace.back()) {
      run.terminated_by = Termination::fixpoint;
      return run;
    }
    run.trace.push_back(std::move(next));
  }
  run.terminated_by = Termination::step_cap;
  return run;
}

ProbabilisticCellularAutomaton point_mass(const CellularAutomaton& ca) {
  ProbabilisticCellularAutomaton pca{ca.name, ca.shape, {}, ca.form};
  pca.rule.reserve(ca.rule.size());
  for (auto v : ca.rule) pca.rule.push_back({{v, 1.0}});
  return pca;
}

ProbabilisticCellularAutomaton make_constant_pca(std::string name, LatticeShape shape, Distribution d) {
  const auto count = shape.neighborhood_count();
  if (count == npos || count == 0) throw SizeLimitError("rule table for this shape is empty or too large");
  return {std::move(name), std::move(shape), std::vector<Distribution>(count, d), RuleForm::constant};
}

std::size_t SamplingChooser::choose(const Distribution& d) {
  const double u = uniform01(*rng_);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    cumulative += d[i].second;
    if (u < cumulative) return i;
  }
  // Rounding left u above the total mass: take the last entry with mass.
  for (std::size_t i = d.size(); i-- > 0;) {
    if (d[i].second > 0.0) return i;
  }
  return d.size() - 1;
}

Lattice pca_step(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, Chooser& chooser) {
  pca.shape.check_lattice(lattice);
  Lattice next(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto& d = pca.rule[pca.shape.neighborhood_code(lattice, i)];
    next[i] = d[chooser.choose(d)].first;
  }
  return next;
}

Lattice pca_step(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, RandomStream& rng) {
  SamplingChooser chooser(rng);
  return pca_step(pca, lattice, chooser);
}

std::map<Lattice, double> pca_step_distribution(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice,
                                                std::size_t cap) {
  pca.shape.check_lattice(lattice);
  // Per-cell supports with zero-mass entries dropped.
  std::vector<Distribution> cells(lattice.size());
  std::size_t combinations = 1;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    for (const auto& [v, p] : pca.rule[pca.shape.neighborhood_code(lattice, i)]) {
      if (p > 0.0) cells[i].push_back({v, p});
    }
    if (cells[i].empty()) throw SizeLimitError("cell " + std::to_string(i) + " has an empty distribution");
    if (combinations > cap / cells[i].size()) {
      throw SizeLimitError("more than " + std::to_string(cap) +
                           " successor lattices; use Monte Carlo estimation instead");
    }
    combinations *= cells[i].size();
  }
  std::map<Lattice, double> result;
  std::vector<std::size_t> digit(lattice.size(), 0);
  for (std::size_t n = 0; n < combinations; ++n) {
    Lattice succ(lattice.size());
    double p = 1.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      succ[i] = cells[i][digit[i]].first;
      p *= cells[i][digit[i]].second;
    }
    result[succ] += p;
    for (std::size_t i = lattice.size(); i-- > 0;) {
      if (++digit[i] < cells[i].size()) break;
      digit[i] = 0;
    }
  }
  return result;
}

CaRun pca_run(const ProbabilisticCellularAutomaton& pca, const Lattice& lattice, std::size_t t_max,
              Chooser& chooser) {
  CaRun run;
  run.trace.push_back(lattice);
  for (std::size_t t = 0; t < t_max; ++t) {
    auto next = pca_step(pca, run.trace.back(), chooser);
    if (next == run.trace.back()) {
      run.terminated_by = Termination::fixpoint;
      return run;
    }
    run.trace.push_back(std::move(next));
  }
  run.terminated_by = Termination::step_cap;
  return run;
}

}  // namespace mimic

#pragma once

// Propositional state predicates:
//   expr := term ('|' term)* ; term := factor ('&' factor)* ;
//   factor := '!' factor | '(' expr ')' | 'true' | 'false' | atom
// Atoms:
//   lattice_has(q)     some root cell holds cell state q
//   cell<i>_value(q)   root cell i holds q
//   cell<i>_state(s)   the SA hosted by cell i (the root SA of an HA unit) is in state s
//   outer_state(s)     the outer SA of a ca_from_sa root is in state s
//   accepting          product states whose pattern component is final
//   pattern_state(p)   product states whose pattern component is p

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mimic/composition.hpp"

namespace mimic {

enum class PropKind { lattice_has, cell_value, cell_state, outer_state, accepting, pattern_state };

struct AtomicProp {
  PropKind kind = PropKind::accepting;
  std::size_t cell = 0;
  std::string arg;
  std::string text;  // canonical spelling, as it appears in label sets

  friend bool operator==(const AtomicProp&, const AtomicProp&) = default;
};

/// Throws PropertyError for names outside the schema above.
AtomicProp parse_atomic(std::string_view text);

class Predicate {
 public:
  static Predicate parse(std::string_view text);
  static Predicate always_true() { return parse("true"); }

  bool evaluate(const std::set<std::string>& labels) const;
  template <class Holds>
  bool evaluate_with(Holds&& holds) const {
    return eval(root_, holds);
  }

  const std::vector<AtomicProp>& atoms() const { return atoms_; }
  const std::string& text() const { return text_; }

 private:
  enum class Op { yes, no, atom, negate, conj, disj };
  struct Node {
    Op op;
    std::size_t a = 0;
    std::size_t b = 0;
  };

  template <class Holds>
  bool eval(std::size_t n, Holds& holds) const {
    const auto& node = nodes_[n];
    switch (node.op) {
      case Op::yes: return true;
      case Op::no: return false;
      case Op::atom: return holds(atoms_[node.a]);
      case Op::negate: return !eval(node.a, holds);
      case Op::conj: return eval(node.a, holds) && eval(node.b, holds);
      case Op::disj: return eval(node.a, holds) || eval(node.b, holds);
    }
    return false;
  }

  friend class PredicateParser;
  std::vector<Node> nodes_;
  std::vector<AtomicProp> atoms_;
  std::size_t root_ = 0;
  std::string text_;
};

/// Every atomic proposition that holds in a root configuration.
std::set<std::string> atomic_props(const MimicAutomaton& ma, const MimicConfiguration& cfg);
bool prop_holds(const MimicAutomaton& ma, const MimicConfiguration& cfg, const AtomicProp& p);

}  // namespace mimic

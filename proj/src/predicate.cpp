#include <algorithm>
#include <cctype>

#include "mimic/predicate.hpp"

namespace mimic {

AtomicProp parse_atomic(std::string_view text) {
  AtomicProp p;
  p.text = std::string(text);
  if (text == "accepting") {
    p.kind = PropKind::accepting;
    return p;
  }
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw PropertyError("unknown proposition '" + std::string(text) + "'");
  }
  const auto head = text.substr(0, open);
  p.arg = std::string(text.substr(open + 1, text.size() - open - 2));
  if (p.arg.empty()) throw PropertyError("proposition '" + std::string(text) + "' has an empty argument");
  if (head == "lattice_has") {
    p.kind = PropKind::lattice_has;
  } else if (head == "outer_state") {
    p.kind = PropKind::outer_state;
  } else if (head == "pattern_state") {
    p.kind = PropKind::pattern_state;
  } else if (head.starts_with("cell") && (head.ends_with("_value") || head.ends_with("_state"))) {
    const auto digits = head.substr(4, head.size() - 4 - 6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw PropertyError("unknown proposition '" + std::string(text) + "'");
    }
    p.cell = std::stoul(std::string(digits));
    p.kind = head.ends_with("_value") ? PropKind::cell_value : PropKind::cell_state;
  } else {
    throw PropertyError("unknown proposition '" + std::string(text) + "'");
  }
  return p;
}

class PredicateParser {
 public:
  explicit PredicateParser(std::string_view text) : text_(text) {}

  Predicate run() {
    Predicate p;
    p.text_ = std::string(text_);
    out_ = &p;
    p.root_ = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  using Op = Predicate::Op;

  [[noreturn]] void fail(const std::string& why) const {
    throw PropertyError("predicate '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::size_t add(Op op, std::size_t a = 0, std::size_t b = 0) {
    out_->nodes_.push_back({op, a, b});
    return out_->nodes_.size() - 1;
  }

  std::size_t expr() {
    auto left = term();
    while (accept('|')) left = add(Op::disj, left, term());
    return left;
  }

  std::size_t term() {
    auto left = factor();
    while (accept('&')) left = add(Op::conj, left, factor());
    return left;
  }

  std::size_t factor() {
    if (accept('!')) return add(Op::negate, factor());
    if (accept('(')) {
      auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (pos_ == start) fail("expected a proposition");
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto close = text_.find(')', pos_);
      if (close == std::string_view::npos) fail("unterminated proposition argument");
      pos_ = close + 1;
    }
    const auto word = text_.substr(start, pos_ - start);
    if (word == "true") return add(Op::yes);
    if (word == "false") return add(Op::no);
    out_->atoms_.push_back(parse_atomic(word));
    return add(Op::atom, out_->atoms_.size() - 1);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Predicate* out_ = nullptr;
};

Predicate Predicate::parse(std::string_view text) { return PredicateParser(text).run(); }

bool Predicate::evaluate(const std::set<std::string>& labels) const {
  return evaluate_with([&](const AtomicProp& p) { return labels.contains(p.text); });
}

namespace {

std::optional<std::string> hosted_state(const MimicAutomaton& ma, const Binding& b, const MimicConfiguration& cfg,
                                        std::size_t cell) {
  const auto& unit = b.cell_map.at(cfg.lattice[cell]);
  const auto& st = cfg.units.at(cell);
  if (const auto* s = std::get_if<PlainSaUnit>(&unit)) {
    return ma.sas.at(s->sa).states.at(std::get<SaUnitState>(st).state);
  }
  if (const auto* h = std::get_if<HaUnit>(&unit)) {
    const auto& ha = ma.has.at(h->ha);
    return ha.sas[ha.root].states.at(std::get<HaConfiguration>(st).active.at(ha.root));
  }
  return std::nullopt;
}

}  // namespace

bool prop_holds(const MimicAutomaton& ma, const MimicConfiguration& cfg, const AtomicProp& p) {
  const auto& b = ma.root();
  const auto& shape = shape_of(ma.scheduler(b));
  auto named = [&](CellValue v) -> const std::string& { return shape.cell_states.at(v); };
  switch (p.kind) {
    case PropKind::lattice_has:
      for (auto v : cfg.lattice) {
        if (named(v) == p.arg) return true;
      }
      return false;
    case PropKind::cell_value:
      return p.cell < cfg.lattice.size() && named(cfg.lattice[p.cell]) == p.arg;
    case PropKind::cell_state: {
      if (b.mode != BindingMode::sa_from_ca || p.cell >= cfg.lattice.size()) return false;
      auto s = hosted_state(ma, b, cfg, p.cell);
      return s && *s == p.arg;
    }
    case PropKind::outer_state:
      return b.mode == BindingMode::ca_from_sa && ma.sas.at(b.outer_sa).states.at(cfg.outer_state) == p.arg;
    case PropKind::accepting:
    case PropKind::pattern_state:
      return false;
  }
  return false;
}

std::set<std::string> atomic_props(const MimicAutomaton& ma, const MimicConfiguration& cfg) {
  const auto& b = ma.root();
  const auto& shape = shape_of(ma.scheduler(b));
  std::set<std::string> labels;
  for (std::size_t i = 0; i < cfg.lattice.size(); ++i) {
    const auto& q = shape.cell_states.at(cfg.lattice[i]);
    labels.insert("lattice_has(" + q + ")");
    labels.insert("cell" + std::to_string(i) + "_value(" + q + ")");
    if (b.mode == BindingMode::sa_from_ca) {
      if (auto s = hosted_state(ma, b, cfg, i)) labels.insert("cell" + std::to_string(i) + "_state(" + *s + ")");
    }
  }
  if (b.mode == BindingMode::ca_from_sa) {
    labels.insert("outer_state(" + ma.sas.at(b.outer_sa).states.at(cfg.outer_state) + ")");
  }
  return labels;
}

}  // namespace mimic

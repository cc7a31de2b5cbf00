#include "mimic/format.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mimic {

std::string_view to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::lexical: return "lexical";
    case DiagnosticKind::syntax: return "syntax";
    case DiagnosticKind::reference: return "reference";
    case DiagnosticKind::semantic: return "semantic";
  }
  return "?";
}

std::string to_string(const Diagnostic& d) {
  std::string s = d.where.file + ":" + std::to_string(d.where.line) + ":" + std::to_string(d.where.column) + ": " +
                  std::string(to_string(d.kind)) + ": " + d.message;
  if (!d.hint.empty()) s += " [" + d.hint + "]";
  return s;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& ds) {
  std::string s;
  for (const auto& d : ds) s += (s.empty() ? "" : "\n") + to_string(d);
  return s;
}

}  // namespace

ParseFailure::ParseFailure(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

bool ModelDocument::has_model(std::string_view name) const {
  const std::string n(name);
  return mas.contains(n) || dhrs.contains(n) || serials.contains(n);
}

std::vector<std::string> ModelDocument::model_names() const {
  std::vector<std::string> names;
  for (const auto& [n, _] : mas) names.push_back(n);
  for (const auto& [n, _] : dhrs) names.push_back(n);
  for (const auto& [n, _] : serials) names.push_back(n);
  std::sort(names.begin(), names.end());
  return names;
}

bool operator==(const ModelDocument& a, const ModelDocument& b) {
  return a.sas == b.sas && a.cas == b.cas && a.has == b.has && a.bindings == b.bindings && a.mas == b.mas &&
         a.dhrs == b.dhrs && a.serials == b.serials && a.properties == b.properties && a.signatures == b.signatures;
}

Word split_symbols(std::string_view text) {
  Word w;
  for (std::size_t i = 0; i < text.size();) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    w.emplace_back(text.substr(i, len));
    i += len;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Lexing: the text becomes blocks of fields and table rows.

namespace {

struct Token {
  enum Kind { word, string, lbrack, rbrack, arrow, slash };
  Kind kind = word;
  std::string text;
  std::size_t column = 0;
};

struct RawLine {
  std::size_t line = 0;
  std::string key;  // empty for table rows
  std::size_t key_column = 0;
  std::vector<Token> values;
  std::string raw;  // value text after the colon, comment stripped and trimmed
  std::size_t raw_column = 0;
};

struct RawBlock {
  std::string kind;
  std::string name;
  SourceLocation where;
  std::vector<RawLine> lines;
};

const std::vector<std::string>& block_kinds() {
  static const std::vector<std::string> kinds{"sa",  "ca",         "pca",      "ha",       "binding",
                                              "ma",  "dhr",        "serial_dhr", "property", "signature"};
  return kinds;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_key_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_word_break(char c) { return is_space(c) || c == '[' || c == ']' || c == '"' || c == '{' || c == '}'; }

bool valid_name(std::string_view s) {
  if (s.empty() || s == "->" || s == "/" || s == "*") return false;
  for (char c : s) {
    if (is_word_break(c) || c == ':' || c == '#' || c == '\n') return false;
  }
  return s.find("->") == std::string_view::npos;
}

class Lexer {
 public:
  Lexer(std::string_view text, std::string file, std::vector<Diagnostic>& diags)
      : text_(text), file_(std::move(file)), diags_(diags) {}

  std::vector<RawBlock> run() {
    std::vector<RawBlock> blocks;
    std::optional<RawBlock> open;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text_.size()) {
      auto end = text_.find('\n', start);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      std::string line(text_.substr(start, end - start));
      start = end + 1;
      strip_comment(line);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) {
        if (end == text_.size()) break;
        continue;
      }
      const auto last = line.find_last_not_of(" \t\r");
      const std::string_view body(line.data() + first, last - first + 1);
      if (!open) {
        open = header(body, line_no, first + 1);
        if (open && open->kind.empty()) open.reset();
      } else if (body == "}") {
        blocks.push_back(std::move(*open));
        open.reset();
      } else {
        field(body, line_no, first + 1, *open);
      }
      if (end == text_.size()) break;
    }
    if (open) {
      diag(open->where.line, open->where.column, DiagnosticKind::syntax,
           "block '" + open->name + "' is not closed", "add a line containing only '}'");
      blocks.push_back(std::move(*open));
    }
    return blocks;
  }

 private:
  void diag(std::size_t line, std::size_t col, DiagnosticKind k, std::string msg, std::string hint = {}) {
    diags_.push_back({{file_, line, col}, k, std::move(msg), std::move(hint)});
  }

  static void strip_comment(std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        return;
      }
    }
  }

  /// Returns an empty-kind block (skipped body) on a malformed header.
  std::optional<RawBlock> header(std::string_view body, std::size_t line, std::size_t col) {
    std::vector<std::string> words;
    std::size_t i = 0;
    std::vector<std::size_t> cols;
    while (i < body.size()) {
      while (i < body.size() && is_space(body[i])) ++i;
      if (i >= body.size()) break;
      if (body[i] == '{') {
        words.emplace_back("{");
        cols.push_back(col + i);
        ++i;
        continue;
      }
      const auto s = i;
      while (i < body.size() && !is_space(body[i]) && body[i] != '{') ++i;
      words.emplace_back(body.substr(s, i - s));
      cols.push_back(col + s);
    }
    const auto& kinds = block_kinds();
    if (words.empty() || std::find(kinds.begin(), kinds.end(), words[0]) == kinds.end()) {
      diag(line, col, DiagnosticKind::syntax, "expected a block", "one of: sa ca pca ha binding ma dhr serial_dhr property signature");
      return std::nullopt;
    }
    if (words.size() != 3 || words[2] != "{") {
      diag(line, col, DiagnosticKind::syntax, "malformed block header", "<kind> <name> {");
      return RawBlock{};
    }
    if (!valid_name(words[1])) {
      diag(line, cols[1], DiagnosticKind::lexical, "invalid name '" + words[1] + "'");
    }
    return RawBlock{words[0], words[1], {file_, line, col}, {}};
  }

  void field(std::string_view body, std::size_t line, std::size_t col, RawBlock& block) {
    RawLine raw;
    raw.line = line;
    // `key:` or `key key:` at the start of the line; anything else is a table row.
    std::size_t i = 0;
    while (i < body.size() && is_key_char(body[i])) ++i;
    std::size_t key_end = i;
    if (i > 0) {
      auto j = i;
      while (j < body.size() && is_space(body[j])) ++j;
      if (j < body.size() && body[j] != ':' && is_key_char(body[j])) {
        auto k = j;
        while (k < body.size() && is_key_char(body[k])) ++k;
        auto m = k;
        while (m < body.size() && is_space(body[m])) ++m;
        if (m < body.size() && body[m] == ':') {
          raw.key = std::string(body.substr(0, i)) + " " + std::string(body.substr(j, k - j));
          key_end = m;
        }
      } else if (j < body.size() && body[j] == ':') {
        raw.key = std::string(body.substr(0, i));
        key_end = j;
      }
    }
    std::size_t vstart = 0;
    if (!raw.key.empty()) {
      raw.key_column = col;
      vstart = key_end + 1;
    }
    const auto value = body.substr(vstart);
    const auto first = value.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      raw.raw = std::string(value.substr(first));
      raw.raw_column = col + vstart + first;
    } else {
      raw.raw_column = col + body.size();
    }
    raw.values = tokenize(value, line, col + vstart);
    block.lines.push_back(std::move(raw));
  }

  std::vector<Token> tokenize(std::string_view s, std::size_t line, std::size_t col) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
      if (is_space(s[i])) {
        ++i;
        continue;
      }
      const auto c = col + i;
      if (s[i] == '"') {
        const auto close = s.find('"', i + 1);
        if (close == std::string_view::npos) {
          diag(line, c, DiagnosticKind::lexical, "unterminated string", "close it with '\"'");
          return out;
        }
        out.push_back({Token::string, std::string(s.substr(i + 1, close - i - 1)), c});
        i = close + 1;
      } else if (s[i] == '[') {
        out.push_back({Token::lbrack, "[", c});
        ++i;
      } else if (s[i] == ']') {
        out.push_back({Token::rbrack, "]", c});
        ++i;
      } else if (s[i] == '{' || s[i] == '}') {
        diag(line, c, DiagnosticKind::lexical, std::string("unexpected '") + s[i] + "'",
             "a closing brace must be alone on its line");
        ++i;
      } else if (s.substr(i, 2) == "->") {
        out.push_back({Token::arrow, "->", c});
        i += 2;
      } else {
        const auto start = i;
        while (i < s.size() && !is_word_break(s[i]) && s.substr(i, 2) != "->") ++i;
        auto w = std::string(s.substr(start, i - start));
        out.push_back({w == "/" ? Token::slash : Token::word, std::move(w), c});
      }
    }
    return out;
  }

  std::string_view text_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
};

// ---------------------------------------------------------------------------
// Building: raw blocks become library objects.

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

struct FieldSpec {
  std::string key;
  bool repeatable = false;
};

const std::map<std::string, std::vector<FieldSpec>>& field_specs() {
  static const std::map<std::string, std::vector<FieldSpec>> specs{
      {"sa", {{"states"}, {"initial"}, {"finals"}, {"inputs"}, {"outputs"}, {"partial"}, {"delta", true}}},
      {"ca", {{"states"}, {"width"}, {"radius"}, {"boundary"}, {"rule expr"}, {"rule table"}, {"rule const"}}},
      {"pca", {{"states"}, {"width"}, {"radius"}, {"boundary"}, {"rule expr"}, {"rule table"}, {"rule const"}}},
      {"ha", {{"members"}, {"root"}, {"gamma", true}}},
      {"binding",
       {{"mode"}, {"ca"}, {"cell", true}, {"initial"}, {"voter"}, {"quorum"}, {"prefer"}, {"outer"}, {"readout"},
        {"default"}, {"seed", true}, {"t_max"}}},
      {"ma", {{"root_binding"}, {"max_depth"}, {"initial"}, {"inputs"}, {"policy"}, {"cycle"}}},
      {"dhr", {{"executors"}, {"scheduler"}, {"voter"}, {"quorum"}, {"prefer"}, {"initial"}, {"inputs"}}},
      {"serial_dhr", {{"stages"}, {"inputs"}}},
      {"property", {{"kind"}, {"predicate"}, {"pattern"}, {"steps"}, {"method"}, {"threshold"}}},
      {"signature", {{"description"}, {"severity"}, {"pattern"}}},
  };
  return specs;
}

std::string namespace_of(const std::string& kind) {
  if (kind == "pca") return "ca";
  if (kind == "dhr" || kind == "serial_dhr") return "ma";
  return kind;
}

std::string namespace_label(const std::string& ns) {
  if (ns == "ca") return "scheduler";
  if (ns == "ma") return "model";
  return ns;
}

class Builder {
 public:
  Builder(std::vector<RawBlock> blocks, std::vector<Diagnostic>& diags) : blocks_(std::move(blocks)), diags_(diags) {}

  ModelDocument run() {
    index_blocks();
    for (const char* kind : {"sa", "ca", "pca", "ha", "binding", "ma", "dhr", "serial_dhr", "property", "signature"}) {
      for (const auto* b : by_kind_[kind]) build(*b);
    }
    if (diags_.empty()) check_models();
    return std::move(doc_);
  }

 private:
  using Fields = std::map<std::string, const RawLine*>;

  void diag(const SourceLocation& at, DiagnosticKind k, std::string msg, std::string hint = {}) {
    diags_.push_back({at, k, std::move(msg), std::move(hint)});
  }
  SourceLocation at(const RawBlock& b, const RawLine& l, std::size_t col) const { return {b.where.file, l.line, col}; }
  SourceLocation at(const RawBlock& b, const RawLine& l, const Token& t) const { return at(b, l, t.column); }
  SourceLocation at(const RawBlock& b, const RawLine& l) const { return at(b, l, l.key_column ? l.key_column : l.raw_column); }

  void index_blocks() {
    std::map<std::pair<std::string, std::string>, const RawBlock*> seen;
    for (const auto& b : blocks_) {
      if (b.kind.empty()) continue;
      const auto ns = namespace_of(b.kind);
      auto [it, fresh] = seen.try_emplace({ns, b.name}, &b);
      if (!fresh) {
        const auto& w = it->second->where;
        const auto what = b.kind == "signature" ? std::string("signature id") : namespace_label(ns);
        diag(b.where, DiagnosticKind::semantic,
             "duplicate " + what + " '" + b.name + "' in " + b.where.file + " (first declared in " + w.file + ":" +
                 std::to_string(w.line) + ")");
        continue;
      }
      by_kind_[b.kind].push_back(&b);
      doc_.origin[b.kind + " " + b.name] = b.where;
    }
  }

  /// Splits a block into its fields, reporting unknown and repeated keys. Rows stay in `rows`.
  Fields fields(const RawBlock& b, std::vector<const RawLine*>& repeated, std::vector<const RawLine*>& rows,
                const std::string& repeat_key = {}) {
    Fields f;
    const auto& specs = field_specs().at(b.kind);
    for (const auto& l : b.lines) {
      if (l.key.empty()) {
        rows.push_back(&l);
        continue;
      }
      auto spec = std::find_if(specs.begin(), specs.end(), [&](const FieldSpec& s) { return s.key == l.key; });
      if (spec == specs.end()) {
        std::string hint = "expected one of:";
        for (const auto& s : specs) hint += " " + s.key + ":";
        diag(at(b, l), DiagnosticKind::syntax, "unknown field '" + l.key + "' in " + b.kind + " block", hint);
        continue;
      }
      if (spec->repeatable) {
        if (l.key == repeat_key || repeat_key.empty()) repeated.push_back(&l);
        rep_[l.key].push_back(&l);
        continue;
      }
      if (!f.try_emplace(l.key, &l).second) {
        diag(at(b, l), DiagnosticKind::syntax, "field '" + l.key + "' given twice");
      }
    }
    return f;
  }

  const RawLine* require(const RawBlock& b, const Fields& f, const std::string& key) {
    auto it = f.find(key);
    if (it != f.end()) return it->second;
    diag(b.where, DiagnosticKind::syntax, b.kind + " '" + b.name + "' lacks field '" + key + "'", key + ": ...");
    return nullptr;
  }
  static const RawLine* optional_field(const Fields& f, const std::string& key) {
    auto it = f.find(key);
    return it == f.end() ? nullptr : it->second;
  }

  std::optional<std::vector<std::string>> names(const RawBlock& b, const RawLine& l) {
    std::vector<std::string> out;
    for (const auto& t : l.values) {
      if (t.kind != Token::word || !valid_name(t.text)) {
        diag(at(b, l, t), DiagnosticKind::syntax, "expected a name, found '" + t.text + "'");
        return std::nullopt;
      }
      out.push_back(t.text);
    }
    std::set<std::string> uniq(out.begin(), out.end());
    if (uniq.size() != out.size()) {
      diag(at(b, l), DiagnosticKind::semantic, "repeated name in '" + l.key + "'");
      return std::nullopt;
    }
    return out;
  }

  std::optional<std::string> one_name(const RawBlock& b, const RawLine& l) {
    if (l.values.size() != 1 || l.values[0].kind != Token::word || !valid_name(l.values[0].text)) {
      diag(at(b, l, l.raw_column), DiagnosticKind::syntax, "expected exactly one name after '" + l.key + ":'");
      return std::nullopt;
    }
    return l.values[0].text;
  }

  std::optional<std::size_t> one_size(const RawBlock& b, const RawLine& l) {
    if (l.values.size() == 1) {
      if (auto v = parse_size(l.values[0].text)) return v;
    }
    diag(at(b, l, l.raw_column), DiagnosticKind::syntax, "expected a non-negative integer after '" + l.key + ":'");
    return std::nullopt;
  }

  /// Items from tokens [pos, end): quoted strings and bracketed lists.
  std::optional<std::vector<Word>> items(const RawBlock& b, const RawLine& l, std::size_t pos, std::size_t end) {
    std::vector<Word> out;
    while (pos < end) {
      const auto& t = l.values[pos];
      if (t.kind == Token::string) {
        if (std::any_of(t.text.begin(), t.text.end(), [](char c) { return is_space(c) || c == '"'; })) {
          diag(at(b, l, t), DiagnosticKind::lexical, "whitespace inside a symbol string", "use a [list] instead");
          return std::nullopt;
        }
        out.push_back(split_symbols(t.text));
        ++pos;
      } else if (t.kind == Token::lbrack) {
        Word w;
        ++pos;
        while (pos < end && l.values[pos].kind == Token::word) w.push_back(l.values[pos++].text);
        if (pos >= end || l.values[pos].kind != Token::rbrack) {
          diag(at(b, l, pos < end ? l.values[pos].column : t.column), DiagnosticKind::syntax, "expected ']'");
          return std::nullopt;
        }
        ++pos;
        out.push_back(std::move(w));
      } else {
        diag(at(b, l, t), DiagnosticKind::syntax, "expected a quoted string or [list], found '" + t.text + "'",
             "\"ab\" or [a b]");
        return std::nullopt;
      }
    }
    return out;
  }

  std::optional<Word> one_item(const RawBlock& b, const RawLine& l, std::size_t pos, std::size_t end) {
    auto v = items(b, l, pos, end);
    if (!v) return std::nullopt;
    if (v->size() != 1) {
      diag(at(b, l, l.raw_column), DiagnosticKind::syntax, "expected exactly one quoted string or [list]");
      return std::nullopt;
    }
    return std::move(v->front());
  }

  std::optional<Lattice> lattice_item(const RawBlock& b, const RawLine& l, std::size_t pos, std::size_t end,
                                      const LatticeShape& shape) {
    auto w = one_item(b, l, pos, end);
    if (!w) return std::nullopt;
    Lattice out;
    for (const auto& s : *w) {
      const auto v = index_of(shape.cell_states, s);
      if (v == npos) {
        diag(at(b, l, l.values[pos].column), DiagnosticKind::semantic, "'" + s + "' is not a cell state");
        return std::nullopt;
      }
      out.push_back(static_cast<CellValue>(v));
    }
    if (out.size() != shape.width) {
      diag(at(b, l, l.values[pos].column), DiagnosticKind::semantic,
           "lattice has " + std::to_string(out.size()) + " cells, expected " + std::to_string(shape.width));
      return std::nullopt;
    }
    return out;
  }

  void report(const RawBlock& b, const ValidationReport& r) {
    for (const auto& v : r) diag(b.where, DiagnosticKind::semantic, to_string(v));
  }

  void build(const RawBlock& b) {
    rep_.clear();
    try {
      if (b.kind == "sa") build_sa(b);
      else if (b.kind == "ca" || b.kind == "pca") build_ca(b);
      else if (b.kind == "ha") build_ha(b);
      else if (b.kind == "binding") build_binding(b);
      else if (b.kind == "ma") build_ma(b);
      else if (b.kind == "dhr") build_dhr(b);
      else if (b.kind == "serial_dhr") build_serial(b);
      else if (b.kind == "property") build_property(b);
      else if (b.kind == "signature") build_signature(b);
    } catch (const Error& e) {
      diag(b.where, DiagnosticKind::semantic, e.what());
    }
  }

  void build_sa(const RawBlock& b) {
    std::vector<const RawLine*> deltas, rows;
    auto f = fields(b, deltas, rows, "delta");
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    SequentialAutomaton sa;
    sa.name = b.name;
    const auto* st = require(b, f, "states");
    const auto* in = require(b, f, "inputs");
    if (!st || !in) return;
    auto states = names(b, *st);
    auto inputs = names(b, *in);
    if (!states || !inputs) return;
    sa.states = *states;
    sa.inputs = *inputs;
    sa.outputs = sa.states;
    if (const auto* o = optional_field(f, "outputs")) {
      auto outs = names(b, *o);
      if (!outs) return;
      sa.outputs = *outs;
    }
    if (const auto* i = optional_field(f, "initial")) {
      auto n = one_name(b, *i);
      if (!n) return;
      sa.initial = sa.state_index(*n);
      if (sa.initial == npos) {
        diag(at(b, *i, i->values[0]), DiagnosticKind::semantic, "initial state '" + *n + "' is not a state");
        return;
      }
    }
    if (const auto* fl = optional_field(f, "finals")) {
      auto fs = names(b, *fl);
      if (!fs) return;
      for (std::size_t k = 0; k < fs->size(); ++k) {
        const auto s = sa.state_index((*fs)[k]);
        if (s == npos) {
          diag(at(b, *fl, fl->values[k]), DiagnosticKind::semantic, "final state '" + (*fs)[k] + "' is not a state");
          return;
        }
        sa.finals.push_back(s);
      }
      std::sort(sa.finals.begin(), sa.finals.end());
    }
    if (const auto* p = optional_field(f, "partial")) {
      auto n = one_name(b, *p);
      if (!n || (*n != "true" && *n != "false")) {
        if (n) diag(at(b, *p, p->values[0]), DiagnosticKind::syntax, "expected true or false");
        return;
      }
      sa.partial = *n == "true";
    }
    sa.next.assign(sa.states.size() * sa.inputs.size(), npos);
    sa.out.assign(sa.next.size(), npos);
    bool ok = true;
    for (const auto* d : deltas) {
      const auto& v = d->values;
      const bool shape_ok = (v.size() == 4 || v.size() == 6) && v[0].kind == Token::word && v[1].kind == Token::word &&
                            v[2].kind == Token::arrow && v[3].kind == Token::word &&
                            (v.size() == 4 || (v[4].kind == Token::slash && v[5].kind == Token::word));
      if (!shape_ok) {
        diag(at(b, *d, d->raw_column), DiagnosticKind::syntax, "malformed transition",
             "delta: <state> <symbol> -> <state> [/ <output>]");
        ok = false;
        continue;
      }
      const auto from = sa.state_index(v[0].text);
      const auto sym = sa.input_index(v[1].text);
      const auto to = sa.state_index(v[3].text);
      const auto& out_name = v.size() == 6 ? v[5].text : v[3].text;
      const auto out = sa.output_index(out_name);
      const Token* bad = from == npos ? &v[0] : sym == npos ? &v[1] : to == npos ? &v[3] : nullptr;
      if (bad) {
        const auto what = bad == &v[1] ? "is not in the input alphabet of '" : "is not a state of '";
        diag(at(b, *d, *bad), DiagnosticKind::semantic, "'" + bad->text + "' " + what + b.name + "'");
        ok = false;
        continue;
      }
      if (out == npos) {
        diag(at(b, *d, v.size() == 6 ? v[5] : v[3]), DiagnosticKind::semantic,
             "'" + out_name + "' is not in the output alphabet of '" + b.name + "'");
        ok = false;
        continue;
      }
      const auto k = sa.slot(from, sym);
      if (sa.next[k] != npos && (sa.next[k] != to || sa.out[k] != out)) {
        diag(at(b, *d, d->raw_column), DiagnosticKind::semantic,
             "conflicting transition for (" + v[0].text + ", " + v[1].text + ")");
        ok = false;
        continue;
      }
      sa.next[k] = to;
      sa.out[k] = out;
    }
    if (!ok) return;
    auto r = validate(sa);
    if (!r.empty()) return report(b, r);
    doc_.sas.emplace(b.name, std::move(sa));
  }

  /// Neighborhood patterns (`*` matches any state) expanded to codes.
  std::optional<std::vector<std::size_t>> expand(const RawBlock& b, const RawLine& l, const LatticeShape& shape,
                                                 std::size_t n) {
    std::vector<std::vector<CellValue>> choices;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = l.values[i];
      if (t.kind != Token::word) {
        diag(at(b, l, t), DiagnosticKind::syntax, "expected a cell state or '*'");
        return std::nullopt;
      }
      if (t.text == "*") {
        std::vector<CellValue> all(shape.cell_states.size());
        for (std::size_t q = 0; q < all.size(); ++q) all[q] = static_cast<CellValue>(q);
        choices.push_back(std::move(all));
        continue;
      }
      const auto q = index_of(shape.cell_states, t.text);
      if (q == npos) {
        diag(at(b, l, t), DiagnosticKind::semantic, "'" + t.text + "' is not a cell state of '" + b.name + "'");
        return std::nullopt;
      }
      choices.push_back({static_cast<CellValue>(q)});
    }
    std::vector<std::size_t> codes{0};
    for (const auto& c : choices) {
      std::vector<std::size_t> next;
      for (auto code : codes) {
        for (auto v : c) next.push_back(code * shape.cell_states.size() + v);
      }
      codes = std::move(next);
    }
    return codes;
  }

  std::optional<Distribution> distribution(const RawBlock& b, const RawLine& l, std::size_t pos,
                                           const LatticeShape& shape) {
    Distribution d;
    for (; pos < l.values.size(); ++pos) {
      const auto& t = l.values[pos];
      const auto at_sign = t.text.rfind('@');
      std::optional<double> p;
      if (t.kind == Token::word && at_sign != std::string::npos) p = parse_double(std::string_view(t.text).substr(at_sign + 1));
      if (!p) {
        diag(at(b, l, t), DiagnosticKind::syntax, "expected <state>@<probability>, found '" + t.text + "'");
        return std::nullopt;
      }
      const auto q = index_of(shape.cell_states, t.text.substr(0, at_sign));
      if (q == npos) {
        diag(at(b, l, t), DiagnosticKind::semantic, "'" + t.text.substr(0, at_sign) + "' is not a cell state");
        return std::nullopt;
      }
      d.emplace_back(static_cast<CellValue>(q), *p);
    }
    if (d.empty()) diag(at(b, l, l.raw_column), DiagnosticKind::syntax, "empty distribution");
    return d.empty() ? std::nullopt : std::optional(d);
  }

  void build_ca(const RawBlock& b) {
    const bool prob = b.kind == "pca";
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    LatticeShape shape;
    const auto* st = require(b, f, "states");
    const auto* w = require(b, f, "width");
    if (!st || !w) return;
    auto states = names(b, *st);
    auto width = one_size(b, *w);
    if (!states || !width) return;
    shape.cell_states = *states;
    shape.width = *width;
    if (const auto* r = optional_field(f, "radius")) {
      auto radius = one_size(b, *r);
      if (!radius) return;
      shape.radius = *radius;
    }
    if (const auto* bd = optional_field(f, "boundary")) {
      const auto& v = bd->values;
      if (v.size() == 1 && v[0].text == "periodic") {
        shape.boundary = {};
      } else if (v.size() == 2 && v[0].text == "fixed" && index_of(shape.cell_states, v[1].text) != npos) {
        shape.boundary = {BoundaryKind::fixed, static_cast<CellValue>(index_of(shape.cell_states, v[1].text))};
      } else {
        diag(at(b, *bd, bd->raw_column), DiagnosticKind::syntax, "malformed boundary", "periodic | fixed <state>");
        return;
      }
    }
    if (auto r = validate(CellularAutomaton{b.name, shape, {}, RuleForm::table}); !r.empty()) {
      // Shape defects only; the rule is checked below.
      ValidationReport shape_defects;
      for (auto& v : r) {
        if (v.invariant != "rule_total") shape_defects.push_back(v);
      }
      if (!shape_defects.empty()) return report(b, shape_defects);
    }
    const auto count = shape.neighborhood_count();
    const auto* expr = optional_field(f, "rule expr");
    const auto* table = optional_field(f, "rule table");
    const auto* cnst = optional_field(f, "rule const");
    if ((expr != nullptr) + (table != nullptr) + (cnst != nullptr) != 1) {
      diag(b.where, DiagnosticKind::syntax, b.kind + " '" + b.name + "' needs exactly one rule",
           "rule expr: xor|identity|majority, rule table: or rule const:");
      return;
    }
    if (!table) {
      for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "table row without 'rule table:'");
      if (!rows.empty()) return;
    }
    if (expr) {
      auto n = one_name(b, *expr);
      if (!n) return;
      auto form = rule_form_from(*n);
      if (!form) {
        diag(at(b, *expr, expr->values[0]), DiagnosticKind::semantic, "unknown built-in rule '" + *n + "'",
             "xor | identity | majority");
        return;
      }
      auto ca = make_ca(b.name, shape, *form);
      if (prob) {
        doc_.cas.emplace(b.name, point_mass(ca));
      } else {
        doc_.cas.emplace(b.name, std::move(ca));
      }
      return;
    }
    if (cnst) {
      if (prob) {
        auto d = distribution(b, *cnst, 0, shape);
        if (!d) return;
        auto pca = make_constant_pca(b.name, shape, *d);
        if (auto r = validate(pca); !r.empty()) return report(b, r);
        doc_.cas.emplace(b.name, std::move(pca));
      } else {
        auto n = one_name(b, *cnst);
        if (!n) return;
        const auto q = index_of(shape.cell_states, *n);
        if (q == npos) {
          diag(at(b, *cnst, cnst->values[0]), DiagnosticKind::semantic, "'" + *n + "' is not a cell state");
          return;
        }
        doc_.cas.emplace(b.name,
                         CellularAutomaton{b.name, shape, std::vector<CellValue>(count, static_cast<CellValue>(q)),
                                           RuleForm::constant});
      }
      return;
    }
    if (!table->values.empty()) {
      diag(at(b, *table, table->raw_column), DiagnosticKind::syntax, "rows go on the following lines");
      return;
    }
    const auto n = shape.arity();
    std::vector<std::optional<Distribution>> dist(count);
    std::vector<std::optional<CellValue>> det(count);
    bool ok = true;
    for (const auto* r : rows) {
      const auto& v = r->values;
      if (v.size() < n + 2 || v[n].kind != Token::arrow || (!prob && v.size() != n + 2)) {
        diag(at(b, *r, r->raw_column), DiagnosticKind::syntax, "malformed rule row",
             prob ? "<" + std::to_string(n) + " states> -> <state>@<p> ..."
                  : "<" + std::to_string(n) + " states> -> <state>");
        ok = false;
        continue;
      }
      auto codes = expand(b, *r, shape, n);
      if (!codes) {
        ok = false;
        continue;
      }
      if (prob) {
        auto d = distribution(b, *r, n + 1, shape);
        if (!d) {
          ok = false;
          continue;
        }
        for (auto c : *codes) dist[c] = *d;
      } else {
        const auto q = index_of(shape.cell_states, v[n + 1].text);
        if (v[n + 1].kind != Token::word || q == npos) {
          diag(at(b, *r, v[n + 1]), DiagnosticKind::semantic, "'" + v[n + 1].text + "' is not a cell state");
          ok = false;
          continue;
        }
        for (auto c : *codes) det[c] = static_cast<CellValue>(q);
      }
    }
    if (!ok) return;
    std::size_t missing = 0;
    std::size_t first_missing = npos;
    for (std::size_t c = 0; c < count; ++c) {
      if (prob ? !dist[c] : !det[c]) {
        ++missing;
        if (first_missing == npos) first_missing = c;
      }
    }
    if (missing) {
      std::string nb;
      for (auto v : shape.decode_neighborhood(first_missing)) nb += (nb.empty() ? "" : " ") + shape.cell_states[v];
      diag(at(b, *table), DiagnosticKind::semantic,
           "rule leaves " + std::to_string(missing) + " neighborhoods undefined, first (" + nb + ")",
           "add rows or a '*' default row first");
      return;
    }
    if (prob) {
      ProbabilisticCellularAutomaton pca{b.name, shape, {}, RuleForm::table};
      for (auto& d : dist) pca.rule.push_back(std::move(*d));
      if (auto r = validate(pca); !r.empty()) return report(b, r);
      doc_.cas.emplace(b.name, std::move(pca));
    } else {
      CellularAutomaton ca{b.name, shape, {}, RuleForm::table};
      for (auto& d : det) ca.rule.push_back(*d);
      doc_.cas.emplace(b.name, std::move(ca));
    }
  }

  void build_ha(const RawBlock& b) {
    std::vector<const RawLine*> gammas, rows;
    auto f = fields(b, gammas, rows, "gamma");
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    const auto* m = require(b, f, "members");
    if (!m) return;
    auto members = names(b, *m);
    if (!members) return;
    HierarchicalAutomaton ha;
    ha.name = b.name;
    for (std::size_t i = 0; i < members->size(); ++i) {
      auto it = doc_.sas.find((*members)[i]);
      if (it == doc_.sas.end()) {
        unresolved(b, *m, m->values[i], "sa");
        return;
      }
      ha.sas.push_back(it->second);
    }
    if (const auto* r = optional_field(f, "root")) {
      auto n = one_name(b, *r);
      if (!n) return;
      ha.root = ha.sa_index(*n);
      if (ha.root == npos) {
        diag(at(b, *r, r->values[0]), DiagnosticKind::reference, "root '" + *n + "' is not a member");
        return;
      }
    }
    for (const auto* g : gammas) {
      const auto& v = g->values;
      if (v.size() < 4 || v[2].kind != Token::arrow) {
        diag(at(b, *g, g->raw_column), DiagnosticKind::syntax, "malformed refinement", "gamma: <sa> <state> -> <sa>...");
        return;
      }
      const auto sa = ha.sa_index(v[0].text);
      if (sa == npos) {
        diag(at(b, *g, v[0]), DiagnosticKind::reference, "'" + v[0].text + "' is not a member");
        return;
      }
      const auto state = ha.sas[sa].state_index(v[1].text);
      if (state == npos) {
        diag(at(b, *g, v[1]), DiagnosticKind::semantic, "'" + v[1].text + "' is not a state of '" + v[0].text + "'");
        return;
      }
      auto& children = ha.gamma[{sa, state}];
      for (std::size_t i = 3; i < v.size(); ++i) {
        const auto c = ha.sa_index(v[i].text);
        if (c == npos) {
          diag(at(b, *g, v[i]), DiagnosticKind::reference, "'" + v[i].text + "' is not a member");
          return;
        }
        children.push_back(c);
      }
    }
    if (auto r = validate(ha); !r.empty()) return report(b, r);
    doc_.has.emplace(b.name, std::move(ha));
  }

  void unresolved(const RawBlock& b, const RawLine& l, const Token& t, const std::string& kind) {
    diag(at(b, l, t), DiagnosticKind::reference, "no " + kind + " named '" + t.text + "'");
  }

  bool declared(const std::string& kind, const std::string& name) const {
    auto it = by_kind_.find(kind);
    if (it == by_kind_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const RawBlock* b) { return b->name == name; });
  }

  std::optional<VoterPolicy> voter(const RawBlock& b, const Fields& f) {
    const auto* v = optional_field(f, "voter");
    const auto* q = optional_field(f, "quorum");
    const auto* p = optional_field(f, "prefer");
    if (!v) {
      if (q || p) diag(at(b, q ? *q : *p), DiagnosticKind::syntax, "quorum/prefer without a voter", "voter: strict_majority|plurality");
      return std::nullopt;
    }
    VoterPolicy policy;
    auto kind = one_name(b, *v);
    if (!kind) return std::nullopt;
    if (*kind == "strict_majority") {
      policy.kind = VoterKind::strict_majority;
    } else if (*kind == "plurality" || *kind == "plurality_with_tiebreak") {
      policy.kind = VoterKind::plurality_with_tiebreak;
    } else {
      diag(at(b, *v, v->values[0]), DiagnosticKind::syntax, "unknown voter '" + *kind + "'", "strict_majority | plurality");
      return std::nullopt;
    }
    if (q) {
      auto n = one_size(b, *q);
      if (!n) return std::nullopt;
      policy.quorum = *n;
    }
    if (p) {
      auto words = items(b, *p, 0, p->values.size());
      if (!words) return std::nullopt;
      policy.preference = *words;
    }
    return policy;
  }

  void build_binding(const RawBlock& b) {
    std::vector<const RawLine*> repeated, rows;
    auto f = fields(b, repeated, rows);
    Binding bd;
    bd.name = b.name;
    if (const auto* m = optional_field(f, "mode")) {
      auto n = one_name(b, *m);
      if (!n) return;
      if (*n == "sa_from_ca") {
        bd.mode = BindingMode::sa_from_ca;
      } else if (*n == "ca_from_sa") {
        bd.mode = BindingMode::ca_from_sa;
      } else {
        diag(at(b, *m, m->values[0]), DiagnosticKind::syntax, "unknown mode '" + *n + "'", "sa_from_ca | ca_from_sa");
        return;
      }
    }
    const auto* c = require(b, f, "ca");
    if (!c) return;
    auto ca = one_name(b, *c);
    if (!ca) return;
    auto it = doc_.cas.find(*ca);
    if (it == doc_.cas.end()) {
      if (!declared("ca", *ca) && !declared("pca", *ca)) unresolved(b, *c, c->values[0], "ca or pca");
      return;
    }
    bd.ca = *ca;
    const auto& shape = shape_of(it->second);

    const auto cells = rep_["cell"];
    if (bd.mode == BindingMode::sa_from_ca) {
      std::vector<std::optional<Unit>> map(shape.cell_states.size());
      for (const auto* l : cells) {
        const auto& v = l->values;
        if (v.size() < 4 || v[1].kind != Token::arrow ||
            (v[2].text != "pipeline" && v.size() != 4)) {
          diag(at(b, *l, l->raw_column), DiagnosticKind::syntax, "malformed cell mapping",
               "cell: <state> -> sa|ha|binding <name> or pipeline <binding>...");
          return;
        }
        const auto q = index_of(shape.cell_states, v[0].text);
        if (q == npos) {
          diag(at(b, *l, v[0]), DiagnosticKind::semantic, "'" + v[0].text + "' is not a cell state of '" + *ca + "'");
          return;
        }
        if (map[q]) {
          diag(at(b, *l, v[0]), DiagnosticKind::semantic, "cell state '" + v[0].text + "' mapped twice");
          return;
        }
        const auto& kind = v[2].text;
        if (kind == "sa") {
          if (!doc_.sas.contains(v[3].text)) {
            if (!declared("sa", v[3].text)) unresolved(b, *l, v[3], "sa");
            return;
          }
          map[q] = PlainSaUnit{v[3].text};
        } else if (kind == "ha") {
          if (!doc_.has.contains(v[3].text)) {
            if (!declared("ha", v[3].text)) unresolved(b, *l, v[3], "ha");
            return;
          }
          map[q] = HaUnit{v[3].text, ""};
        } else if (kind == "binding") {
          if (!declared("binding", v[3].text)) return unresolved(b, *l, v[3], "binding");
          map[q] = NestedUnit{v[3].text};
        } else if (kind == "pipeline") {
          PipelineUnit p;
          for (std::size_t i = 3; i < v.size(); ++i) {
            if (!declared("binding", v[i].text)) return unresolved(b, *l, v[i], "binding");
            p.stages.push_back(v[i].text);
          }
          map[q] = std::move(p);
        } else {
          diag(at(b, *l, v[2]), DiagnosticKind::syntax, "unknown unit kind '" + kind + "'", "sa | ha | binding | pipeline");
          return;
        }
      }
      for (std::size_t q = 0; q < map.size(); ++q) {
        if (!map[q]) {
          diag(b.where, DiagnosticKind::semantic,
               "binding '" + b.name + "' hosts nothing on cell state '" + shape.cell_states[q] + "'",
               "cell: " + shape.cell_states[q] + " -> sa <name>");
          return;
        }
        bd.cell_map.push_back(std::move(*map[q]));
      }
    } else if (!cells.empty()) {
      diag(at(b, *cells.front()), DiagnosticKind::semantic, "ca_from_sa bindings host no cell units");
      return;
    }

    if (const auto* i = optional_field(f, "initial")) {
      auto l = lattice_item(b, *i, 0, i->values.size(), shape);
      if (!l) return;
      bd.initial = *l;
    }
    if (optional_field(f, "voter") || optional_field(f, "quorum") || optional_field(f, "prefer")) {
      auto v = voter(b, f);
      if (!v) return;
      bd.voter = *v;
    }
    if (const auto* o = optional_field(f, "outer")) {
      auto n = one_name(b, *o);
      if (!n) return;
      if (!doc_.sas.contains(*n)) {
        if (!declared("sa", *n)) unresolved(b, *o, o->values[0], "sa");
        return;
      }
      bd.outer_sa = *n;
    } else if (bd.mode == BindingMode::ca_from_sa) {
      require(b, f, "outer");
      return;
    }
    const auto* dflt = optional_field(f, "default");
    if (const auto* r = optional_field(f, "readout")) {
      const auto& v = r->values;
      if (v.size() == 2 && v[0].text == "cell") {
        auto n = parse_size(v[1].text);
        if (!n) {
          diag(at(b, *r, v[1]), DiagnosticKind::syntax, "expected a cell index");
          return;
        }
        bd.readout = ReadoutCell{*n};
      } else if (v.size() == 3 && v[0].text == "parity") {
        bd.readout = ReadoutParity{v[1].text, v[2].text};
      } else if (v.size() == 1 && v[0].text == "table") {
        ReadoutTable t;
        for (const auto* row : rows) {
          const auto& rv = row->values;
          std::size_t arrow = 0;
          while (arrow < rv.size() && rv[arrow].kind != Token::arrow) ++arrow;
          if (arrow + 2 != rv.size() || rv.back().kind != Token::word) {
            diag(at(b, *row, row->raw_column), DiagnosticKind::syntax, "malformed readout row", "<lattice> -> <symbol>");
            return;
          }
          auto l = lattice_item(b, *row, 0, arrow, shape);
          if (!l) return;
          t.entries[*l] = rv.back().text;
        }
        rows.clear();
        if (dflt) {
          auto n = one_name(b, *dflt);
          if (!n) return;
          t.fallback = *n;
        }
        dflt = nullptr;
        bd.readout = std::move(t);
      } else {
        diag(at(b, *r, r->raw_column), DiagnosticKind::syntax, "malformed readout",
             "readout: cell <i> | parity <even> <odd> | table");
        return;
      }
    }
    if (dflt) diag(at(b, *dflt), DiagnosticKind::syntax, "'default:' belongs to 'readout: table'");
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "table row without 'readout: table'");
    for (const auto* s : rep_["seed"]) {
      const auto& v = s->values;
      if (v.size() < 3 || v[0].kind != Token::word || v[1].kind != Token::arrow) {
        diag(at(b, *s, s->raw_column), DiagnosticKind::syntax, "malformed seed", "seed: <symbol> -> <lattice>");
        return;
      }
      auto l = lattice_item(b, *s, 2, v.size(), shape);
      if (!l) return;
      bd.seeds[v[0].text] = *l;
    }
    if (const auto* t = optional_field(f, "t_max")) {
      auto n = one_size(b, *t);
      if (!n) return;
      bd.t_max = *n;
    }
    doc_.bindings.emplace(b.name, std::move(bd));
  }

  std::optional<std::vector<Word>> item_list(const RawBlock& b, const Fields& f, const std::string& key) {
    const auto* l = optional_field(f, key);
    if (!l) return std::vector<Word>{};
    return items(b, *l, 0, l->values.size());
  }

  void build_ma(const RawBlock& b) {
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    MaDecl d;
    d.name = b.name;
    const auto* r = require(b, f, "root_binding");
    if (!r) return;
    auto root = one_name(b, *r);
    if (!root) return;
    if (!doc_.bindings.contains(*root)) {
      if (!declared("binding", *root)) unresolved(b, *r, r->values[0], "binding");
      return;
    }
    d.root_binding = *root;
    if (const auto* m = optional_field(f, "max_depth")) {
      auto n = one_size(b, *m);
      if (!n) return;
      d.max_depth = *n;
    }
    if (const auto* i = optional_field(f, "initial")) {
      auto w = one_item(b, *i, 0, i->values.size());
      if (!w) return;
      d.initial = *w;
    }
    auto inputs = item_list(b, f, "inputs");
    auto policy = item_list(b, f, "policy");
    auto cycle = item_list(b, f, "cycle");
    if (!inputs || !policy || !cycle) return;
    d.inputs = *inputs;
    d.policy = *policy;
    d.cycle = *cycle;
    doc_.mas.emplace(b.name, std::move(d));
  }

  void build_dhr(const RawBlock& b) {
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    DhrDecl d;
    d.name = b.name;
    const auto* e = require(b, f, "executors");
    const auto* s = require(b, f, "scheduler");
    if (!e || !s) return;
    std::vector<std::string> ex;
    for (const auto& t : e->values) {
      if (t.kind != Token::word) {
        diag(at(b, *e, t), DiagnosticKind::syntax, "expected a name");
        return;
      }
      if (!doc_.sas.contains(t.text)) {
        if (!declared("sa", t.text)) unresolved(b, *e, t, "sa");
        return;
      }
      ex.push_back(t.text);
    }
    d.executors = ex;
    auto sched = one_name(b, *s);
    if (!sched) return;
    if (!doc_.cas.contains(*sched)) {
      if (!declared("ca", *sched) && !declared("pca", *sched)) unresolved(b, *s, s->values[0], "ca or pca");
      return;
    }
    d.scheduler = *sched;
    if (optional_field(f, "voter") || optional_field(f, "quorum") || optional_field(f, "prefer")) {
      auto v = voter(b, f);
      if (!v) return;
      d.voter = *v;
    }
    if (const auto* i = optional_field(f, "initial")) {
      auto l = lattice_item(b, *i, 0, i->values.size(), shape_of(doc_.cas.at(*sched)));
      if (!l) return;
      d.initial = one_item(b, *i, 0, i->values.size());
    }
    auto inputs = item_list(b, f, "inputs");
    if (!inputs) return;
    d.inputs = *inputs;
    doc_.dhrs.emplace(b.name, std::move(d));
  }

  void build_serial(const RawBlock& b) {
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    SerialDecl d;
    d.name = b.name;
    const auto* s = require(b, f, "stages");
    if (!s) return;
    for (const auto& t : s->values) {
      if (!doc_.dhrs.contains(t.text)) {
        if (!declared("dhr", t.text)) unresolved(b, *s, t, "dhr");
        return;
      }
      d.stages.push_back(t.text);
    }
    auto inputs = item_list(b, f, "inputs");
    if (!inputs) return;
    d.inputs = *inputs;
    doc_.serials.emplace(b.name, std::move(d));
  }

  void build_property(const RawBlock& b) {
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    Property p;
    p.name = b.name;
    const auto* k = require(b, f, "kind");
    if (!k) return;
    auto kind = one_name(b, *k);
    if (!kind) return;
    bool found = false;
    for (auto pk : {PropertyKind::invariant, PropertyKind::reach, PropertyKind::bad_prefix, PropertyKind::probability}) {
      if (to_string(pk) == *kind) {
        p.kind = pk;
        found = true;
      }
    }
    if (!found) {
      diag(at(b, *k, k->values[0]), DiagnosticKind::syntax, "unknown property kind '" + *kind + "'",
           "invariant | reach | bad_prefix | probability");
      return;
    }
    if (p.kind == PropertyKind::bad_prefix) {
      const auto* pat = require(b, f, "pattern");
      if (!pat) return;
      auto n = one_name(b, *pat);
      if (!n) return;
      if (!doc_.sas.contains(*n)) {
        if (!declared("sa", *n)) unresolved(b, *pat, pat->values[0], "sa");
        return;
      }
      p.pattern = *n;
    } else {
      const auto* pr = require(b, f, "predicate");
      if (!pr) return;
      try {
        p.predicate = Predicate::parse(pr->raw).text();
      } catch (const PropertyError& e) {
        diag(at(b, *pr, pr->raw_column), DiagnosticKind::semantic, e.what());
        return;
      }
      if (optional_field(f, "pattern")) diag(at(b, *optional_field(f, "pattern")), DiagnosticKind::syntax, "pattern: applies to bad_prefix properties only");
    }
    if (const auto* s = optional_field(f, "steps")) {
      auto n = one_size(b, *s);
      if (!n) return;
      p.steps = *n;
    }
    if (const auto* m = optional_field(f, "method")) {
      auto n = one_name(b, *m);
      if (!n) return;
      if (*n == "exact") {
        p.method = ProbabilityMethod::exact;
      } else if (*n == "monte_carlo") {
        p.method = ProbabilityMethod::monte_carlo;
      } else {
        diag(at(b, *m, m->values[0]), DiagnosticKind::syntax, "unknown method '" + *n + "'", "exact | monte_carlo");
        return;
      }
    }
    if (const auto* t = optional_field(f, "threshold")) {
      std::optional<double> v;
      if (t->values.size() == 1) v = parse_double(t->values[0].text);
      if (!v || *v < 0.0 || *v > 1.0) {
        diag(at(b, *t, t->raw_column), DiagnosticKind::syntax, "expected a probability in [0, 1]");
        return;
      }
      p.threshold = *v;
    }
    if (p.kind == PropertyKind::probability && p.method == ProbabilityMethod::monte_carlo && !p.steps) {
      diag(b.where, DiagnosticKind::semantic, "Monte Carlo estimation needs a horizon", "steps: <N>");
      return;
    }
    if (p.kind != PropertyKind::probability && (p.steps || p.threshold || optional_field(f, "method"))) {
      diag(b.where, DiagnosticKind::syntax, "steps/method/threshold apply to probability properties only");
      return;
    }
    doc_.properties.emplace(b.name, std::move(p));
  }

  void build_signature(const RawBlock& b) {
    std::vector<const RawLine*> none, rows;
    auto f = fields(b, none, rows);
    for (const auto* r : rows) diag(at(b, *r), DiagnosticKind::syntax, "unexpected line", "<field>: <values>");
    SignatureDecl s;
    s.id = b.name;
    const auto* pat = require(b, f, "pattern");
    if (!pat) return;
    auto n = one_name(b, *pat);
    if (!n) return;
    auto it = doc_.sas.find(*n);
    if (it == doc_.sas.end()) {
      if (!declared("sa", *n)) unresolved(b, *pat, pat->values[0], "sa");
      return;
    }
    s.pattern = *n;
    if (const auto* d = optional_field(f, "description")) {
      if (d->values.size() != 1 || d->values[0].kind != Token::string) {
        diag(at(b, *d, d->raw_column), DiagnosticKind::syntax, "expected one quoted string");
        return;
      }
      s.description = d->values[0].text;
    }
    if (const auto* sv = optional_field(f, "severity")) {
      auto name = one_name(b, *sv);
      if (!name) return;
      auto sev = parse_severity(*name);
      if (!sev) {
        diag(at(b, *sv, sv->values[0]), DiagnosticKind::syntax, "unknown severity '" + *name + "'",
             "low | medium | high | critical");
        return;
      }
      s.severity = *sev;
    }
    if (auto r = validate(signature_of(doc_, s)); !r.empty()) return report(b, r);
    doc_.signatures.emplace(b.name, std::move(s));
  }

  void check_models() {
    for (const auto& name : doc_.model_names()) {
      const std::string kind = doc_.mas.contains(name) ? "ma" : doc_.dhrs.contains(name) ? "dhr" : "serial_dhr";
      const auto& where = doc_.origin.at(kind + " " + name);
      try {
        if (kind == "dhr") {
          if (auto r = validate(dhr_of(doc_, name)); !r.empty()) {
            for (const auto& v : r) diag(where, DiagnosticKind::semantic, to_string(v));
            continue;
          }
        } else if (kind == "serial_dhr") {
          if (auto r = validate(serial_of(doc_, name)); !r.empty()) {
            for (const auto& v : r) diag(where, DiagnosticKind::semantic, to_string(v));
            continue;
          }
        }
        const auto ma = ma_of(doc_, name);
        if (auto r = validate(ma); !r.empty()) {
          for (const auto& v : r) diag(where, DiagnosticKind::semantic, to_string(v));
          continue;
        }
        initial_of(doc_, name, ma);
        universe_of(doc_, name, ma);
      } catch (const Error& e) {
        diag(where, DiagnosticKind::semantic, e.what());
      }
    }
  }

  std::vector<RawBlock> blocks_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, std::vector<const RawBlock*>> by_kind_;
  std::map<std::string, std::vector<const RawLine*>> rep_;
  ModelDocument doc_;
};

ParseResult build_document(std::vector<RawBlock> blocks, std::vector<Diagnostic> diags) {
  ParseResult result;
  auto doc = Builder(std::move(blocks), diags).run();
  if (diags.empty()) result.document = std::move(doc);
  result.diagnostics = std::move(diags);
  return result;
}

}  // namespace

ParseResult try_parse(std::string_view text, std::string_view file) {
  std::vector<Diagnostic> diags;
  auto blocks = Lexer(text, std::string(file), diags).run();
  return build_document(std::move(blocks), std::move(diags));
}

ParseResult try_parse_files(std::span<const std::filesystem::path> files) {
  std::vector<Diagnostic> diags;
  std::vector<RawBlock> blocks;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      diags.push_back({{path.string(), 0, 0}, DiagnosticKind::lexical, "cannot read file", ""});
      continue;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto more = Lexer(ss.str(), path.string(), diags).run();
    blocks.insert(blocks.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return build_document(std::move(blocks), std::move(diags));
}

ModelDocument parse(std::string_view text, std::string_view file) {
  auto r = try_parse(text, file);
  if (!r.document) throw ParseFailure(std::move(r.diagnostics));
  return std::move(*r.document);
}

ModelDocument parse_files(std::span<const std::filesystem::path> files) {
  auto r = try_parse_files(files);
  if (!r.document) throw ParseFailure(std::move(r.diagnostics));
  return std::move(*r.document);
}

// ---------------------------------------------------------------------------
// Canonical text

namespace {

std::string item_text(const Word& w) {
  const bool single = std::all_of(w.begin(), w.end(), [](const std::string& s) {
    return split_symbols(s).size() == 1 && s != "\"" && !is_space(s[0]);
  });
  if (single) {
    std::string s = "\"";
    for (const auto& x : w) s += x;
    return s + "\"";
  }
  std::string s = "[";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + w[i];
  return s + "]";
}

std::string items_text(const std::vector<Word>& ws) {
  std::string s;
  for (const auto& w : ws) s += " " + item_text(w);
  return s;
}

Word lattice_names(const LatticeShape& shape, const Lattice& l) {
  Word w;
  for (auto v : l) w.push_back(shape.cell_states.at(v));
  return w;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += " " + x;
  return s;
}

void write_sa(std::ostream& os, const SequentialAutomaton& sa) {
  os << "sa " << sa.name << " {\n";
  os << "  states:" << join(sa.states) << "\n";
  os << "  initial: " << sa.states.at(sa.initial) << "\n";
  if (!sa.finals.empty()) {
    std::vector<std::string> f;
    for (auto s : sa.finals) f.push_back(sa.states.at(s));
    os << "  finals:" << join(f) << "\n";
  }
  os << "  inputs:" << join(sa.inputs) << "\n";
  os << "  outputs:" << join(sa.outputs) << "\n";
  if (sa.partial) os << "  partial: true\n";
  for (StateId s = 0; s < sa.states.size(); ++s) {
    for (SymbolId a = 0; a < sa.inputs.size(); ++a) {
      const auto k = sa.slot(s, a);
      if (sa.next[k] == npos) continue;
      os << "  delta: " << sa.states[s] << " " << sa.inputs[a] << " -> " << sa.states[sa.next[k]] << " / "
         << sa.outputs[sa.out[k]] << "\n";
    }
  }
  os << "}\n";
}

void write_shape(std::ostream& os, const LatticeShape& shape) {
  os << "  states:" << join(shape.cell_states) << "\n";
  os << "  width: " << shape.width << "\n";
  os << "  radius: " << shape.radius << "\n";
  if (shape.boundary.kind == BoundaryKind::periodic) {
    os << "  boundary: periodic\n";
  } else {
    os << "  boundary: fixed " << shape.cell_states.at(shape.boundary.value) << "\n";
  }
}

std::string neighborhood_text(const LatticeShape& shape, std::size_t code) {
  std::string s;
  for (auto v : shape.decode_neighborhood(code)) s += (s.empty() ? "" : " ") + shape.cell_states[v];
  return s;
}

std::string distribution_text(const LatticeShape& shape, const Distribution& d) {
  std::string s;
  for (const auto& [v, p] : d) s += " " + shape.cell_states.at(v) + "@" + format_double(p);
  return s;
}

bool is_builtin(const CellularAutomaton& ca) {
  if (ca.form == RuleForm::table || ca.form == RuleForm::constant) return false;
  return builtin_rule_table(ca.shape, ca.form) == ca.rule;
}

void write_ca(std::ostream& os, const CellularAutomaton& ca) {
  os << "ca " << ca.name << " {\n";
  write_shape(os, ca.shape);
  const bool uniform = !ca.rule.empty() && std::all_of(ca.rule.begin(), ca.rule.end(), [&](CellValue v) { return v == ca.rule[0]; });
  if (is_builtin(ca)) {
    os << "  rule expr: " << to_string(ca.form) << "\n";
  } else if (ca.form == RuleForm::constant && uniform) {
    os << "  rule const: " << ca.shape.cell_states.at(ca.rule[0]) << "\n";
  } else {
    os << "  rule table:\n";
    for (std::size_t c = 0; c < ca.rule.size(); ++c) {
      os << "    " << neighborhood_text(ca.shape, c) << " -> " << ca.shape.cell_states.at(ca.rule[c]) << "\n";
    }
  }
  os << "}\n";
}

void write_pca(std::ostream& os, const ProbabilisticCellularAutomaton& pca) {
  os << "pca " << pca.name << " {\n";
  write_shape(os, pca.shape);
  std::optional<RuleForm> builtin;
  if (pca.form != RuleForm::table && pca.form != RuleForm::constant) {
    auto ca = make_ca(pca.name, pca.shape, pca.form);
    if (point_mass(ca).rule == pca.rule) builtin = pca.form;
  }
  const bool uniform = !pca.rule.empty() &&
                       std::all_of(pca.rule.begin(), pca.rule.end(), [&](const Distribution& d) { return d == pca.rule[0]; });
  if (builtin) {
    os << "  rule expr: " << to_string(*builtin) << "\n";
  } else if (pca.form == RuleForm::constant && uniform) {
    os << "  rule const:" << distribution_text(pca.shape, pca.rule[0]) << "\n";
  } else {
    os << "  rule table:\n";
    for (std::size_t c = 0; c < pca.rule.size(); ++c) {
      os << "    " << neighborhood_text(pca.shape, c) << " ->" << distribution_text(pca.shape, pca.rule[c]) << "\n";
    }
  }
  os << "}\n";
}

void write_ha(std::ostream& os, const HierarchicalAutomaton& ha) {
  os << "ha " << ha.name << " {\n";
  std::vector<std::string> members;
  for (const auto& sa : ha.sas) members.push_back(sa.name);
  os << "  members:" << join(members) << "\n";
  os << "  root: " << ha.sas.at(ha.root).name << "\n";
  for (const auto& [key, children] : ha.gamma) {
    if (children.empty()) continue;
    std::vector<std::string> c;
    for (auto i : children) c.push_back(ha.sas.at(i).name);
    os << "  gamma: " << ha.sas.at(key.first).name << " " << ha.sas.at(key.first).states.at(key.second) << " ->"
       << join(c) << "\n";
  }
  os << "}\n";
}

void write_voter(std::ostream& os, const VoterPolicy& v) {
  os << "  voter: " << (v.kind == VoterKind::strict_majority ? "strict_majority" : "plurality") << "\n";
  if (v.quorum) os << "  quorum: " << v.quorum << "\n";
  if (!v.preference.empty()) os << "  prefer:" << items_text(v.preference) << "\n";
}

void write_binding(std::ostream& os, const ModelDocument& doc, const Binding& b) {
  const auto& shape = shape_of(doc.cas.at(b.ca));
  os << "binding " << b.name << " {\n";
  os << "  mode: " << to_string(b.mode) << "\n";
  os << "  ca: " << b.ca << "\n";
  for (std::size_t q = 0; q < b.cell_map.size(); ++q) {
    os << "  cell: " << shape.cell_states.at(q) << " -> ";
    std::visit(
        [&](const auto& u) {
          using U = std::decay_t<decltype(u)>;
          if constexpr (std::is_same_v<U, PlainSaUnit>) os << "sa " << u.sa;
          else if constexpr (std::is_same_v<U, HaUnit>) os << "ha " << u.ha;
          else if constexpr (std::is_same_v<U, NestedUnit>) os << "binding " << u.binding;
          else os << "pipeline" << join(u.stages);
        },
        b.cell_map[q]);
    os << "\n";
  }
  if (b.initial) os << "  initial: " << item_text(lattice_names(shape, *b.initial)) << "\n";
  if (b.voter) write_voter(os, *b.voter);
  if (!b.outer_sa.empty()) os << "  outer: " << b.outer_sa << "\n";
  if (!(b.readout == Readout{})) {
    if (const auto* c = std::get_if<ReadoutCell>(&b.readout)) {
      os << "  readout: cell " << c->cell << "\n";
    } else if (const auto* p = std::get_if<ReadoutParity>(&b.readout)) {
      os << "  readout: parity " << p->even << " " << p->odd << "\n";
    } else {
      const auto& t = std::get<ReadoutTable>(b.readout);
      os << "  readout: table\n";
      for (const auto& [l, sym] : t.entries) os << "    " << item_text(lattice_names(shape, l)) << " -> " << sym << "\n";
      if (t.fallback) os << "  default: " << *t.fallback << "\n";
    }
  }
  for (const auto& [sym, l] : b.seeds) os << "  seed: " << sym << " -> " << item_text(lattice_names(shape, l)) << "\n";
  if (b.t_max != kDefaultRunCap) os << "  t_max: " << b.t_max << "\n";
  os << "}\n";
}

void write_ma(std::ostream& os, const MaDecl& d) {
  os << "ma " << d.name << " {\n";
  os << "  root_binding: " << d.root_binding << "\n";
  if (d.max_depth != kDefaultMaxDepth) os << "  max_depth: " << d.max_depth << "\n";
  if (d.initial) os << "  initial: " << item_text(*d.initial) << "\n";
  if (!d.inputs.empty()) os << "  inputs:" << items_text(d.inputs) << "\n";
  if (!d.policy.empty()) os << "  policy:" << items_text(d.policy) << "\n";
  if (!d.cycle.empty()) os << "  cycle:" << items_text(d.cycle) << "\n";
  os << "}\n";
}

void write_dhr(std::ostream& os, const DhrDecl& d) {
  os << "dhr " << d.name << " {\n";
  os << "  executors:" << join(d.executors) << "\n";
  os << "  scheduler: " << d.scheduler << "\n";
  write_voter(os, d.voter);
  if (d.initial) os << "  initial: " << item_text(*d.initial) << "\n";
  if (!d.inputs.empty()) os << "  inputs:" << items_text(d.inputs) << "\n";
  os << "}\n";
}

void write_serial(std::ostream& os, const SerialDecl& d) {
  os << "serial_dhr " << d.name << " {\n";
  os << "  stages:" << join(d.stages) << "\n";
  if (!d.inputs.empty()) os << "  inputs:" << items_text(d.inputs) << "\n";
  os << "}\n";
}

void write_property(std::ostream& os, const Property& p) {
  os << "property " << p.name << " {\n";
  os << "  kind: " << to_string(p.kind) << "\n";
  if (!p.predicate.empty()) os << "  predicate: " << p.predicate << "\n";
  if (!p.pattern.empty()) os << "  pattern: " << p.pattern << "\n";
  if (p.steps) os << "  steps: " << *p.steps << "\n";
  if (p.kind == PropertyKind::probability) os << "  method: " << to_string(p.method) << "\n";
  if (p.threshold) os << "  threshold: " << format_double(*p.threshold) << "\n";
  os << "}\n";
}

void write_signature(std::ostream& os, const SignatureDecl& s) {
  os << "signature " << s.id << " {\n";
  if (!s.description.empty()) os << "  description: \"" << s.description << "\"\n";
  os << "  severity: " << to_string(s.severity) << "\n";
  os << "  pattern: " << s.pattern << "\n";
  os << "}\n";
}

}  // namespace

std::string serialize(const ModelDocument& doc) {
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << "\n";
    first = false;
  };
  // Kinds in alphabetical order, names sorted within each kind (std::map order).
  for (const auto& [n, b] : doc.bindings) sep(), write_binding(os, doc, b);
  for (const auto& [n, s] : doc.cas) {
    if (!is_probabilistic(s)) sep(), write_ca(os, std::get<CellularAutomaton>(s));
  }
  for (const auto& [n, d] : doc.dhrs) sep(), write_dhr(os, d);
  for (const auto& [n, h] : doc.has) sep(), write_ha(os, h);
  for (const auto& [n, m] : doc.mas) sep(), write_ma(os, m);
  for (const auto& [n, s] : doc.cas) {
    if (is_probabilistic(s)) sep(), write_pca(os, std::get<ProbabilisticCellularAutomaton>(s));
  }
  for (const auto& [n, p] : doc.properties) sep(), write_property(os, p);
  for (const auto& [n, s] : doc.sas) sep(), write_sa(os, s);
  for (const auto& [n, s] : doc.serials) sep(), write_serial(os, s);
  for (const auto& [n, s] : doc.signatures) sep(), write_signature(os, s);
  return os.str();
}

// ---------------------------------------------------------------------------
// Resolution

namespace {

void collect(const ModelDocument& doc, const std::string& binding, MimicAutomaton& ma, std::set<std::string>& seen) {
  if (!seen.insert(binding).second) return;
  auto it = doc.bindings.find(binding);
  if (it == doc.bindings.end()) throw ValidationError({{"reference", binding, "no binding of that name"}});
  const auto& b = it->second;
  ma.bindings.emplace(binding, b);
  auto sched = doc.cas.find(b.ca);
  if (sched == doc.cas.end()) throw ValidationError({{"reference", b.ca, "no ca or pca of that name"}});
  ma.cas.emplace(b.ca, sched->second);
  auto add_sa = [&](const std::string& name) {
    auto s = doc.sas.find(name);
    if (s == doc.sas.end()) throw ValidationError({{"reference", name, "no sa of that name"}});
    ma.sas.emplace(name, s->second);
  };
  if (!b.outer_sa.empty()) add_sa(b.outer_sa);
  for (const auto& unit : b.cell_map) {
    if (const auto* p = std::get_if<PlainSaUnit>(&unit)) {
      add_sa(p->sa);
    } else if (const auto* h = std::get_if<HaUnit>(&unit)) {
      auto ha = doc.has.find(h->ha);
      if (ha == doc.has.end()) throw ValidationError({{"reference", h->ha, "no ha of that name"}});
      ma.has.emplace(h->ha, ha->second);
    } else if (const auto* n = std::get_if<NestedUnit>(&unit)) {
      collect(doc, n->binding, ma, seen);
    } else {
      for (const auto& s : std::get<PipelineUnit>(unit).stages) collect(doc, s, ma, seen);
    }
  }
}

const std::vector<Word>& declared_inputs(const ModelDocument& doc, std::string_view model) {
  const std::string m(model);
  if (auto it = doc.mas.find(m); it != doc.mas.end()) return it->second.inputs;
  if (auto it = doc.dhrs.find(m); it != doc.dhrs.end()) return it->second.inputs;
  if (auto it = doc.serials.find(m); it != doc.serials.end()) return it->second.inputs;
  throw UsageError("no model named '" + m + "'");
}

}  // namespace

Lattice lattice_from_names(const LatticeShape& shape, const Word& names) {
  Lattice l;
  for (const auto& n : names) {
    const auto v = index_of(shape.cell_states, n);
    if (v == npos) throw DimensionError("'" + n + "' is not a cell state");
    l.push_back(static_cast<CellValue>(v));
  }
  shape.check_lattice(l);
  return l;
}

DhrStructure dhr_of(const ModelDocument& doc, std::string_view dhr) {
  auto it = doc.dhrs.find(std::string(dhr));
  if (it == doc.dhrs.end()) throw UsageError("no dhr named '" + std::string(dhr) + "'");
  const auto& d = it->second;
  DhrStructure s;
  s.name = d.name;
  for (const auto& e : d.executors) s.executors.push_back(doc.sas.at(e));
  s.scheduler = doc.cas.at(d.scheduler);
  s.voter = d.voter;
  const auto& shape = shape_of(s.scheduler);
  s.initial_lattice = d.initial ? lattice_from_names(shape, *d.initial) : Lattice(shape.width, 0);
  return s;
}

SerialDhr serial_of(const ModelDocument& doc, std::string_view serial) {
  auto it = doc.serials.find(std::string(serial));
  if (it == doc.serials.end()) throw UsageError("no serial_dhr named '" + std::string(serial) + "'");
  SerialDhr s{it->second.name, {}};
  for (const auto& st : it->second.stages) s.stages.push_back(dhr_of(doc, st));
  return s;
}

MimicAutomaton ma_of(const ModelDocument& doc, std::string_view model) {
  const std::string m(model);
  if (doc.dhrs.contains(m)) return build_dhr(dhr_of(doc, m));
  if (doc.serials.contains(m)) return compose_serial(serial_of(doc, m));
  auto it = doc.mas.find(m);
  if (it == doc.mas.end()) throw UsageError("no model named '" + m + "'");
  MimicAutomaton ma;
  ma.name = m;
  ma.root_binding = it->second.root_binding;
  ma.max_depth = it->second.max_depth;
  std::set<std::string> seen;
  collect(doc, ma.root_binding, ma, seen);
  return ma;
}

Signature signature_of(const ModelDocument& doc, const SignatureDecl& decl) {
  return {decl.id, decl.description, doc.sas.at(decl.pattern), decl.severity};
}

MimicConfiguration initial_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma) {
  const std::string m(model);
  if (doc.dhrs.contains(m)) return dhr_initial(ma, dhr_of(doc, m));
  const auto& root = ma.root();
  const auto& shape = shape_of(ma.scheduler(root));
  Lattice l0(shape.width, 0);
  if (auto it = doc.mas.find(m); it != doc.mas.end() && it->second.initial) {
    l0 = lattice_from_names(shape, *it->second.initial);
  } else if (root.initial) {
    l0 = *root.initial;
  }
  return ma_initial(ma, l0);
}

MacroInput to_macro_input(const MimicAutomaton& ma, const Word& item) {
  if (ma.mode() == BindingMode::sa_from_ca) return item;
  return lattice_from_names(shape_of(ma.scheduler(ma.root())), item);
}

std::vector<MacroInput> universe_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma) {
  std::vector<MacroInput> out;
  for (const auto& w : declared_inputs(doc, model)) out.push_back(to_macro_input(ma, w));
  return out;
}

InputPolicy policy_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma) {
  InputPolicy p;
  if (auto it = doc.mas.find(std::string(model)); it != doc.mas.end()) {
    for (const auto& w : it->second.policy) p.prefix.push_back(to_macro_input(ma, w));
    for (const auto& w : it->second.cycle) p.cycle.push_back(to_macro_input(ma, w));
  }
  if (p.prefix.empty() && p.cycle.empty()) p.cycle = universe_of(doc, model, ma);
  if (p.prefix.empty() && p.cycle.empty()) throw UsageError("model '" + std::string(model) + "' declares no inputs");
  return p;
}

}  // namespace mimic

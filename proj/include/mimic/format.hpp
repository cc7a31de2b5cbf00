#pragma once

// Line-oriented model description format.
//
//   # comment
//   <kind> <name> {
//     <field>: <values>
//     ...
//   }
//
// Kinds: sa ca pca ha binding ma dhr serial_dhr property signature. Values
// are whitespace-separated names, quoted symbol strings ("abc" is the three
// one-character symbols a b c) or bracketed lists ([red green]). Table
// rows (`<cells> -> <result>`) follow `rule table:` and `readout: table`.
// Parsing resolves names across every block of every file, then validates
// each object; problems come back as located diagnostics.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimic/checker.hpp"
#include "mimic/detect.hpp"
#include "mimic/dhr.hpp"

namespace mimic {

struct SourceLocation {
  std::string file;
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class DiagnosticKind { lexical, syntax, reference, semantic };

std::string_view to_string(DiagnosticKind k);

struct Diagnostic {
  SourceLocation where;
  DiagnosticKind kind = DiagnosticKind::syntax;
  std::string message;
  std::string hint;  // expected tokens or a fix, may be empty
};

/// "file:line:col: kind: message [hint]"
std::string to_string(const Diagnostic& d);

class ParseFailure : public Error {
 public:
  explicit ParseFailure(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct MaDecl {
  std::string name;
  std::string root_binding;
  std::size_t max_depth = kDefaultMaxDepth;
  /// Root start lattice, by cell state names; Q's first state everywhere when absent.
  std::optional<Word> initial;
  /// Input universe for flattening: blocks (sa_from_ca) or lattices (ca_from_sa).
  std::vector<Word> inputs;
  /// Input policy for probabilistic analysis; `inputs` cycled when both are empty.
  std::vector<Word> policy;
  std::vector<Word> cycle;

  friend bool operator==(const MaDecl&, const MaDecl&) = default;
};

struct DhrDecl {
  std::string name;
  std::vector<std::string> executors;
  std::string scheduler;
  VoterPolicy voter;
  std::optional<Word> initial;
  std::vector<Word> inputs;

  friend bool operator==(const DhrDecl&, const DhrDecl&) = default;
};

struct SerialDecl {
  std::string name;
  std::vector<std::string> stages;
  std::vector<Word> inputs;

  friend bool operator==(const SerialDecl&, const SerialDecl&) = default;
};

struct SignatureDecl {
  std::string id;
  std::string description;
  std::string pattern;
  Severity severity = Severity::medium;

  friend bool operator==(const SignatureDecl&, const SignatureDecl&) = default;
};

/// ma, dhr and serial_dhr blocks share one namespace (they are all "models");
/// ca and pca blocks share another (schedulers).
struct ModelDocument {
  std::map<std::string, SequentialAutomaton> sas;
  std::map<std::string, Scheduler> cas;
  std::map<std::string, HierarchicalAutomaton> has;
  std::map<std::string, Binding> bindings;
  std::map<std::string, MaDecl> mas;
  std::map<std::string, DhrDecl> dhrs;
  std::map<std::string, SerialDecl> serials;
  std::map<std::string, Property> properties;
  std::map<std::string, SignatureDecl> signatures;
  /// Header location of each block, keyed "<kind> <name>"; not part of equality.
  std::map<std::string, SourceLocation> origin;

  bool has_model(std::string_view name) const;
  std::vector<std::string> model_names() const;

  friend bool operator==(const ModelDocument& a, const ModelDocument& b);
};

struct ParseResult {
  std::optional<ModelDocument> document;
  std::vector<Diagnostic> diagnostics;
};

ParseResult try_parse(std::string_view text, std::string_view file = "<input>");
ParseResult try_parse_files(std::span<const std::filesystem::path> files);
/// Throwing variants (ParseFailure).
ModelDocument parse(std::string_view text, std::string_view file = "<input>");
ModelDocument parse_files(std::span<const std::filesystem::path> files);

/// Canonical text: blocks sorted by (kind, name), fields in a fixed order.
std::string serialize(const ModelDocument& doc);

/// Symbols of a quoted item, one per character (UTF-8 aware).
Word split_symbols(std::string_view text);

// ---------------------------------------------------------------------------
// Resolving models (names of ma, dhr or serial_dhr blocks)

/// The MA of a model, holding only the components its root reaches.
MimicAutomaton ma_of(const ModelDocument& doc, std::string_view model);
DhrStructure dhr_of(const ModelDocument& doc, std::string_view dhr);
SerialDhr serial_of(const ModelDocument& doc, std::string_view serial);
Signature signature_of(const ModelDocument& doc, const SignatureDecl& decl);

MimicConfiguration initial_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma);
std::vector<MacroInput> universe_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma);
InputPolicy policy_of(const ModelDocument& doc, std::string_view model, const MimicAutomaton& ma);

/// A word as a root input: the block itself (sa_from_ca) or a lattice by cell state names (ca_from_sa).
MacroInput to_macro_input(const MimicAutomaton& ma, const Word& item);
Lattice lattice_from_names(const LatticeShape& shape, const Word& names);

}  // namespace mimic

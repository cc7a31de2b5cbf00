#include "mimic/detect.hpp"

#include "mimic/format.hpp"

namespace mimic {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
    case Severity::critical: return "critical";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view text) {
  for (auto s : {Severity::low, Severity::medium, Severity::high, Severity::critical}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

ValidationReport validate(const Signature& s) {
  auto report = validate(s.pattern);
  if (s.id.empty()) report.push_back({"name", s.pattern.name, "signature without id"});
  if (s.pattern.finals.empty()) report.push_back({"matchable", s.id, "pattern has no final state"});
  return report;
}

bool DetectionReport::any() const {
  for (const auto& m : matches) {
    if (m.matched) return true;
  }
  return false;
}

DetectionReport detect(const MimicAutomaton& ma, const TransitionSystem& ts, std::span<const Signature> signatures) {
  DetectionReport report;
  report.model = ma.name;
  report.metadata = ma.metadata;
  report.stats = {ts.size(), ts.transition_count(), 0, 0};
  for (const auto& sig : signatures) {
    auto r = check_bad_prefix(ts, sig.pattern);
    report.matches.push_back({sig.id, sig.severity, r.verdict == Verdict::violated, std::move(r.counterexample)});
  }
  return report;
}

DetectionReport detect(const MimicAutomaton& ma, const MimicConfiguration& initial,
                       std::span<const MacroInput> universe, std::span<const Signature> signatures,
                       std::size_t bound) {
  if (signatures.empty()) {
    DetectionReport report;
    report.model = ma.name;
    report.metadata = ma.metadata;
    return report;
  }
  return detect(ma, flatten(ma, initial, universe, bound), signatures);
}

std::vector<Signature> load_signatures(std::span<const std::filesystem::path> sources) {
  std::vector<std::filesystem::path> files;
  for (const auto& src : sources) {
    if (std::filesystem::is_directory(src)) {
      std::vector<std::filesystem::path> inside;
      for (const auto& e : std::filesystem::directory_iterator(src)) {
        if (e.is_regular_file()) inside.push_back(e.path());
      }
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else {
      files.push_back(src);
    }
  }
  std::vector<Signature> out;
  if (files.empty()) return out;
  const auto doc = parse_files(files);
  for (const auto& [id, decl] : doc.signatures) out.push_back(signature_of(doc, decl));
  return out;
}

}  // namespace mimic

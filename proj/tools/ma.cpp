// Command-line front end for mimic automaton models.
//
// Exit codes: 0 holds / clean, 1 violated / matched, 2 resource bound hit,
// 3 usage, parse or validation error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mimic/checker.hpp"
#include "mimic/detect.hpp"
#include "mimic/dhr.hpp"
#include "mimic/format.hpp"
#include "mimic/report.hpp"

namespace {

using namespace mimic;

constexpr int kHolds = 0;
constexpr int kViolated = 1;
constexpr int kResource = 2;
constexpr int kUsage = 3;

struct Common {
  std::vector<std::string> files;
  std::string model;
  std::string format = "text";
};

ModelDocument load(const std::vector<std::string>& files) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  return parse_files(paths);
}

/// `a/b/c` (one symbol per character in each block) or `@file` (one symbol
/// per line, blank lines between blocks).
std::vector<Word> read_blocks(const std::string& spec) {
  std::vector<Word> blocks;
  if (spec.starts_with("@")) {
    std::ifstream in(spec.substr(1));
    if (!in) throw UsageError("cannot read input file '" + spec.substr(1) + "'");
    Word current;
    bool any = false;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) {
        if (any) blocks.push_back(std::move(current));
        current.clear();
        any = false;
        continue;
      }
      current.push_back(line.substr(first, line.find_last_not_of(" \t") - first + 1));
      any = true;
    }
    if (any) blocks.push_back(std::move(current));
    return blocks;
  }
  std::size_t start = 0;
  while (true) {
    const auto slash = spec.find('/', start);
    blocks.push_back(split_symbols(std::string_view(spec).substr(start, slash == std::string::npos ? npos : slash - start)));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return blocks;
}

void write_out(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

int run_validate(const std::vector<std::string>& files, const std::string& format) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  auto r = try_parse_files(paths);
  for (const auto& d : r.diagnostics) std::cerr << to_string(d) << "\n";
  if (format == "json") {
    std::cout << Json{{"valid", r.diagnostics.empty()}, {"diagnostics", diagnostics_json(r.diagnostics)}}.dump(2) << "\n";
  } else if (r.document) {
    const auto& doc = *r.document;
    std::cout << "ok: " << doc.sas.size() << " sa, " << doc.cas.size() << " ca/pca, " << doc.has.size() << " ha, "
              << doc.bindings.size() << " binding, " << doc.model_names().size() << " model, "
              << doc.properties.size() << " property, " << doc.signatures.size() << " signature\n";
  }
  return r.diagnostics.empty() ? kHolds : kUsage;
}

int run_simulate(const Common& c, const std::optional<std::string>& input, std::optional<std::size_t> steps,
                 std::uint64_t seed, const std::string& trace_path) {
  const auto doc = load(c.files);
  const auto ma = ma_of(doc, c.model);
  const auto init = initial_of(doc, c.model, ma);
  std::vector<MacroInput> blocks;
  if (input) {
    for (const auto& w : read_blocks(*input)) blocks.push_back(to_macro_input(ma, w));
  } else {
    auto policy = policy_of(doc, c.model, ma);
    for (std::size_t t = 0; t < steps.value_or(0); ++t) blocks.push_back(policy.at(t));
  }
  const auto n = steps.value_or(blocks.size());
  if (n > 0 && blocks.empty()) throw UsageError("no input blocks to run");
  std::vector<MacroInput> schedule;
  for (std::size_t t = 0; t < n; ++t) schedule.push_back(blocks[t % blocks.size()]);
  RandomStream rng(seed);
  const auto run = ma_run(ma, init, schedule, rng);
  const auto json = trace_json(ma, init, run.trace, run.config);
  if (!trace_path.empty()) write_out(trace_path, json.dump(2) + "\n");
  if (c.format == "json") {
    std::cout << json.dump(2) << "\n";
  } else {
    std::cout << trace_text(ma, init, run.trace);
    std::cout << "final " << describe(ma, run.config) << "\n";
  }
  return kHolds;
}

struct CheckOptions {
  std::string property;
  std::size_t bound = kDefaultStateBound;
  double tol = kDefaultTolerance;
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

int run_check(const Common& c, const CheckOptions& o) {
  const auto doc = load(c.files);
  auto pit = doc.properties.find(o.property);
  if (pit == doc.properties.end()) throw UsageError("no property named '" + o.property + "'");
  const auto& prop = pit->second;
  const auto ma = ma_of(doc, c.model);
  const auto init = initial_of(doc, c.model, ma);

  CheckResult result;
  std::optional<TransitionSystem> ts;
  int code = kHolds;
  if (prop.kind == PropertyKind::probability) {
    const auto target = Predicate::parse(prop.predicate);
    const auto policy = policy_of(doc, c.model, ma);
    if (prop.method == ProbabilityMethod::monte_carlo) {
      result = reach_probability_mc(ma, init, policy, target, *prop.steps, o.trials, o.seed, o.workers);
    } else {
      const auto dtmc = build_dtmc(ma, init, policy, o.bound);
      result = prop.steps ? reach_probability_bounded(dtmc, target, *prop.steps)
                          : reach_probability_exact(dtmc, target, o.tol);
    }
    if (prop.threshold && *result.probability < *prop.threshold) code = kViolated;
  } else {
    const auto universe = universe_of(doc, c.model, ma);
    ts = flatten(ma, init, universe, o.bound);
    switch (prop.kind) {
      case PropertyKind::invariant:
        result = check_invariant(*ts, Predicate::parse(prop.predicate));
        break;
      case PropertyKind::reach:
        result = check_reach(*ts, Predicate::parse(prop.predicate));
        break;
      default:
        result = check_bad_prefix(*ts, doc.sas.at(prop.pattern));
        break;
    }
    code = result.verdict == Verdict::violated ? kViolated : kHolds;
  }
  if (c.format == "json") {
    auto j = check_json(ma, ts ? &*ts : nullptr, result);
    j["property"] = prop.name;
    if (prop.threshold) j["threshold"] = *prop.threshold;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "property " << prop.name << " on " << ma.name << "\n" << check_text(ma, ts ? &*ts : nullptr, result);
    if (prop.threshold) std::cout << "threshold " << *prop.threshold << ": " << (code == kHolds ? "met" : "not met") << "\n";
  }
  return code;
}

int run_dhr(const Common& c, const std::string& input, const std::vector<std::string>& injections, std::uint64_t seed) {
  const auto doc = load(c.files);
  const auto blocks = read_blocks(input);
  Json j{{"model", c.model}};
  if (doc.serials.contains(c.model)) {
    if (!injections.empty()) throw UsageError("--inject applies to a single dhr model");
    const auto run = dhr_run(serial_of(doc, c.model), blocks, seed);
    Json steps = Json::array();
    for (const auto& s : run.steps) {
      Json stages = Json::array();
      for (const auto& st : s.stages) {
        stages.push_back({{"input", render_word(st.input_block)},
                          {"voted", st.voted_output ? Json(render_word(*st.voted_output)) : Json(nullptr)},
                          {"dissenters", st.dissenters}});
      }
      steps.push_back({{"input", render_word(s.input_block)},
                       {"output", s.output ? Json(render_word(*s.output)) : Json(nullptr)},
                       {"stages", stages}});
      if (c.format != "json") {
        std::cout << render_word(s.input_block) << " => " << (s.output ? render_word(*s.output) : "abstain") << "\n";
      }
    }
    j["steps"] = steps;
    j["aborted"] = run.aborted;
    if (c.format == "json") std::cout << j.dump(2) << "\n";
    return kHolds;
  }
  auto d = dhr_of(doc, c.model);
  for (const auto& inj : injections) {
    const auto colon = inj.find(':');
    if (colon == std::string::npos) throw UsageError("--inject expects <slot>:<sa-name>");
    std::size_t slot = 0;
    try {
      slot = std::stoul(inj.substr(0, colon));
    } catch (const std::exception&) {
      throw UsageError("--inject slot must be a number: '" + inj + "'");
    }
    auto sa = doc.sas.find(inj.substr(colon + 1));
    if (sa == doc.sas.end()) throw UsageError("no sa named '" + inj.substr(colon + 1) + "'");
    d = inject_fault(d, slot, sa->second);
  }
  const auto& shape = shape_of(d.scheduler);
  Json steps = Json::array();
  for (const auto& r : dhr_run(d, blocks, seed)) {
    Json slots = Json::array();
    for (const auto& w : r.per_slot_outputs) slots.push_back(render_word(w));
    steps.push_back({{"input", render_word(r.input_block)},
                     {"slots", slots},
                     {"voted", r.voted_output ? Json(render_word(*r.voted_output)) : Json(nullptr)},
                     {"dissenters", r.dissenters},
                     {"lattice_before", render_lattice(shape, r.lattice_before)},
                     {"lattice_after", render_lattice(shape, r.lattice_after)}});
    if (c.format != "json") {
      std::cout << render_lattice(shape, r.lattice_before) << " " << render_word(r.input_block) << " =>";
      for (const auto& w : r.per_slot_outputs) std::cout << " [" << render_word(w) << "]";
      std::cout << " voted " << (r.voted_output ? render_word(*r.voted_output) : "abstain");
      if (!r.dissenters.empty()) {
        std::cout << " dissent";
        for (auto s : r.dissenters) std::cout << " " << s;
      }
      std::cout << "\n";
    }
  }
  j["steps"] = steps;
  if (c.format == "json") std::cout << j.dump(2) << "\n";
  return kHolds;
}

int run_detect(const Common& c, const std::vector<std::string>& signature_files, std::size_t bound) {
  const auto doc = load(c.files);
  std::vector<std::filesystem::path> paths(signature_files.begin(), signature_files.end());
  const auto sigs = load_signatures(paths);
  const auto ma = ma_of(doc, c.model);
  const auto ts = flatten(ma, initial_of(doc, c.model, ma), universe_of(doc, c.model, ma), bound);
  const auto report = detect(ma, ts, sigs);
  if (c.format == "json") {
    std::cout << detection_json(ma, ts, report).dump(2) << "\n";
  } else {
    std::cout << detection_text(ma, ts, report);
  }
  return report.any() ? kViolated : kHolds;
}

int run_export(const Common& c, const std::string& out, bool raw_ca, std::size_t bound) {
  const auto doc = load(c.files);
  const auto ma = ma_of(doc, c.model);
  std::string dot;
  if (raw_ca) {
    dot = raw_rule_dot(ma.scheduler(ma.root()));
  } else if (ma.deterministic()) {
    dot = to_dot(ma, flatten(ma, initial_of(doc, c.model, ma), universe_of(doc, c.model, ma), bound));
  } else {
    dot = to_dot(ma, build_dtmc(ma, initial_of(doc, c.model, ma), policy_of(doc, c.model, ma), bound));
  }
  write_out(out, dot);
  return kHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mimic automaton toolkit: validate, simulate, check, dhr, detect, export-dot"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("files", common.files, "Model files")->required()->check(CLI::ExistingPath);
    sub->add_option("--model", common.model, "Model name (ma, dhr or serial_dhr block)")->required();
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate model files");
  validate_cmd->add_option("files", common.files, "Model files")->required()->check(CLI::ExistingPath);
  add_format(validate_cmd);

  std::optional<std::string> input;
  std::optional<std::size_t> steps;
  std::uint64_t seed = 0;
  std::string trace_path;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a model for a number of macro steps");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--input", input, "Input blocks: a/b/c or @file");
  simulate_cmd->add_option("--steps", steps, "Macro steps (default: number of input blocks)");
  simulate_cmd->add_option("--seed", seed, "Seed of the mt19937_64 stream");
  simulate_cmd->add_option("--trace", trace_path, "Write the JSON trace here");
  add_format(simulate_cmd);

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Check a property");
  add_common(check_cmd);
  check_cmd->add_option("--property", check.property, "Property name")->required();
  check_cmd->add_option("--bound", check.bound, "Maximum number of explored states");
  check_cmd->add_option("--tol", check.tol, "Value iteration tolerance")->check(CLI::PositiveNumber);
  check_cmd->add_option("--trials", check.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", check.seed, "Monte Carlo master seed");
  check_cmd->add_option("--workers", check.workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
  add_format(check_cmd);

  std::string dhr_input;
  std::vector<std::string> injections;
  auto* dhr_cmd = app.add_subcommand("dhr", "Run a DHR structure with optional fault injection");
  add_common(dhr_cmd);
  dhr_cmd->add_option("--input", dhr_input, "Input blocks: @file or a/b/c")->required();
  dhr_cmd->add_option("--inject", injections, "Replace a slot's executor: <slot>:<sa-name>");
  dhr_cmd->add_option("--seed", seed, "Seed of the scheduler's random stream");
  add_format(dhr_cmd);

  std::vector<std::string> signature_files;
  std::size_t bound = kDefaultStateBound;
  auto* detect_cmd = app.add_subcommand("detect", "Scan a model against behavioral signatures");
  add_common(detect_cmd);
  detect_cmd->add_option("--signatures", signature_files, "Signature files or directories")->required();
  detect_cmd->add_option("--bound", bound, "Maximum number of explored states");
  add_format(detect_cmd);

  std::string out_path;
  bool raw_ca = false;
  auto* export_cmd = app.add_subcommand("export-dot", "Write the flattened graph as DOT");
  add_common(export_cmd);
  export_cmd->add_option("--out", out_path, "Output path")->required();
  export_cmd->add_flag("--raw-ca", raw_ca, "Global-map graph of the root scheduler instead");
  export_cmd->add_option("--bound", bound, "Maximum number of explored states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate_cmd) return run_validate(common.files, common.format);
    if (*simulate_cmd) return run_simulate(common, input, steps, seed, trace_path);
    if (*check_cmd) return run_check(common, check);
    if (*dhr_cmd) return run_dhr(common, dhr_input, injections, seed);
    if (*detect_cmd) return run_detect(common, signature_files, bound);
    if (*export_cmd) return run_export(common, out_path, raw_ca, bound);
  } catch (const ParseFailure& e) {
    for (const auto& d : e.diagnostics()) std::cerr << to_string(d) << "\n";
    return kUsage;
  } catch (const ExplosionError& e) {
    std::cerr << "resource bound: " << e.what() << "\n";
    return kResource;
  } catch (const SizeLimitError& e) {
    std::cerr << "resource bound: " << e.what() << "\n";
    return kResource;
  } catch (const ConvergenceError& e) {
    std::cerr << "resource bound: " << e.what() << "\n";
    return kResource;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

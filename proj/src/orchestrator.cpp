#include "testgen/orchestrator.hpp"

#include "testgen/errors.hpp"
#include "testgen/java_units.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

namespace testgen {

std::string to_string(GranularityMode mode) {
  switch (mode) {
    case GranularityMode::ClassLevel: return "class";
    case GranularityMode::MethodLevel: return "method";
    case GranularityMode::Combined: return "combined";
    case GranularityMode::Hybrid: return "hybrid";
  }
  return "class";
}

GranularityMode granularity_from_string(const std::string& s) {
  if (s == "class" || s == "class_level") return GranularityMode::ClassLevel;
  if (s == "method" || s == "method_level") return GranularityMode::MethodLevel;
  if (s == "combined") return GranularityMode::Combined;
  if (s == "hybrid") return GranularityMode::Hybrid;
  throw ConfigError("unknown granularity mode: " + s);
}

std::string method_coverage_key(const std::string& container_id, const std::string& signature) {
  return container_id + "#" + signature;
}

std::string constructor_coverage_key(const std::string& container_id) {
  return container_id + "#<init>";
}

Orchestrator::Orchestrator(const ProjectModel& project, Gateway& gateway, Toolchain& toolchain,
                           const PromptFactory& prompts, const LanguageSpec& lang,
                           OrchestratorOptions options)
    : project_(project), gateway_(gateway), toolchain_(toolchain), prompts_(prompts), lang_(lang),
      options_(std::move(options)) {}

std::string Orchestrator::test_file_path(const ContainerUnit& container,
                                         const std::string& class_name) const {
  std::string dir = container.package_name;
  std::replace(dir.begin(), dir.end(), '.', '/');
  if (!dir.empty()) dir += "/";
  return dir + class_name + lang_.file_suffix;
}

Workspace Orchestrator::unit_workspace() const {
  Workspace ws;
  ws.root = options_.workspace_root;
  ws.project = &project_;
  return ws;
}

ChatSession Orchestrator::new_session(const UnitUnderTest& unit) const {
  ChatSession session;
  session.id = unit.id;
  session.temperature = options_.temperature;
  if (!options_.system_message.empty()) {
    session.messages.push_back(ChatMessage{"system", options_.system_message});
  }
  return session;
}

std::vector<UnitUnderTest> Orchestrator::class_units() const {
  std::vector<UnitUnderTest> units;
  for (const auto& c : project_.containers) {
    if (!options_.include_abstract && (c.is_abstract || c.is_interface_like)) continue;
    UnitUnderTest u;
    u.kind = UnitUnderTest::Kind::Container;
    u.id = c.id;
    u.container_id = c.id;
    u.test_class_name = render_name_pattern(options_.class_test_name_pattern, c.simple_name, "");
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<UnitUnderTest> Orchestrator::method_units() const {
  std::vector<UnitUnderTest> units;
  for (const auto& c : project_.containers) {
    if (!options_.include_abstract && (c.is_abstract || c.is_interface_like)) continue;
    // Overloads share a name; later overloads get an ordinal so every unit
    // keeps a distinct test-class identity.
    std::map<std::string, int> seen;
    for (const auto& m : c.methods) {
      UnitUnderTest u;
      u.kind = UnitUnderTest::Kind::Method;
      u.id = c.id + "#" + m.signature;
      u.container_id = c.id;
      u.method_name = m.name;
      u.method_signature = m.signature;
      int ordinal = ++seen[m.name];
      std::string label = ordinal == 1 ? m.name : m.name + "_" + std::to_string(ordinal);
      u.test_class_name =
          render_name_pattern(options_.method_test_name_pattern, c.simple_name, label);
      units.push_back(std::move(u));
    }
    if (c.has_constructor) {
      UnitUnderTest u;
      u.kind = UnitUnderTest::Kind::ConstructorGroup;
      u.id = constructor_coverage_key(c.id);
      u.container_id = c.id;
      u.test_class_name =
          render_name_pattern(options_.constructor_test_name_pattern, c.simple_name, "");
      units.push_back(std::move(u));
    }
  }
  return units;
}

std::vector<UnitUnderTest> Orchestrator::hybrid_phase2_units(
    const CoverageSnapshot& phase1) const {
  auto uncovered = [&](const std::string& key) {
    auto b = phase1.per_method_branches.find(key);
    if (b != phase1.per_method_branches.end() && b->second.second > 0) {
      return b->second.first < b->second.second;
    }
    // Zero branches: fall back to the method's lines.
    auto l = phase1.per_method_lines.find(key);
    if (l != phase1.per_method_lines.end() && l->second.second > 0) {
      return l->second.first < l->second.second;
    }
    if ((b == phase1.per_method_branches.end() || b->second.second == 0) &&
        (l == phase1.per_method_lines.end() || l->second.second == 0)) {
      // Nothing measurable in this scope: nothing to cover.
      return false;
    }
    return true;
  };

  std::vector<UnitUnderTest> units;
  for (const auto& u : method_units()) {
    std::string key = u.kind == UnitUnderTest::Kind::ConstructorGroup
                          ? constructor_coverage_key(u.container_id)
                          : method_coverage_key(u.container_id, u.method_signature);
    if (uncovered(key)) units.push_back(u);
  }
  return units;
}

TestSuiteArtifact Orchestrator::generate_for_unit(const UnitUnderTest& unit,
                                                  ChatSession& session) {
  const ContainerUnit* container = project_.find_container(unit.container_id);
  if (container == nullptr) {
    throw InputError("unknown container: " + unit.container_id);
  }

  TestSuiteArtifact artifact;
  artifact.unit_id = unit.id;
  artifact.test_class_name = unit.test_class_name;

  std::string prompt;
  switch (unit.kind) {
    case UnitUnderTest::Kind::Container:
      prompt = prompts_.build_class_prompt(*container);
      break;
    case UnitUnderTest::Kind::Method:
      prompt = prompts_.build_method_prompt(*container, unit.method_name, unit.test_class_name);
      break;
    case UnitUnderTest::Kind::ConstructorGroup:
      prompt = prompts_.build_method_prompt(*container, kConstructorTarget, unit.test_class_name);
      break;
  }

  Workspace ws = unit_workspace();
  const std::string file_path = test_file_path(*container, unit.test_class_name);

  SendResult reply;
  try {
    reply = gateway_.send(session, prompt);
  } catch (const BackendUnavailable& e) {
    artifact.aborted = true;
    artifact.abort_reason = e.what();
    return artifact;
  }

  std::vector<SourceFile> files;
  bool fixable = true;
  int repair_round = 0;
  for (;;) {
    if (reply.truncated) {
      artifact.aborted = true;
      artifact.abort_reason = "backend reply was truncated";
      artifact.repair_rounds_used = repair_round;
      return artifact;
    }

    std::vector<std::string> blocks = extract_code_blocks(reply.text);
    std::string content;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (k) content += "\n\n";
      content += blocks[k];
    }
    AlignOutcome aligned =
        align_identity(content, unit.test_class_name, container->package_name, lang_);
    fixable = aligned.fixable;
    files.assign(1, SourceFile{file_path, aligned.source});

    std::string error_text;
    if (!fixable) {
      error_text = file_path + ": error: output is not a compilable test class\n";
    } else {
      std::vector<Diagnostic> diags = toolchain_.compile(ws, files);
      if (diags.empty()) {
        std::vector<TestVerdict> verdicts = toolchain_.run_tests(ws, files);
        bool all_pass = std::all_of(verdicts.begin(), verdicts.end(), [](const TestVerdict& v) {
          return v.status == VerdictStatus::Passed;
        });
        if (all_pass) break;
        std::vector<Diagnostic> failures;
        for (const auto& v : verdicts) {
          if (v.status == VerdictStatus::Failed) {
            failures.push_back(Diagnostic{v.file, std::nullopt, std::nullopt, DiagKind::Other,
                                          v.method + ": " + v.failure_message, v.method});
          }
        }
        error_text = format_diagnostics(failures);
      } else {
        error_text = format_diagnostics(diags);
      }
    }

    if (repair_round >= options_.repair_limit) break;
    ++repair_round;
    try {
      reply = gateway_.send(session, prompts_.build_repair_prompt(error_text));
    } catch (const BackendUnavailable& e) {
      artifact.aborted = true;
      artifact.abort_reason = e.what();
      artifact.repair_rounds_used = repair_round - 1;
      return artifact;
    }
  }
  artifact.repair_rounds_used = repair_round;

  // Finalize: freeze the generated count, analyze extra content, prune until
  // the survivor compiles, then collect verdicts.
  if (!fixable) {
    artifact.removed_files = 1;
    artifact.files.clear();
    return artifact;
  }

  artifact.n_generated = 0;
  for (const auto& f : files) artifact.n_generated += count_test_methods(f.content, lang_);
  artifact.extra_content =
      detect_extra_content(files, {unit.test_class_name}, project_, lang_);

  PruneStats pruned = prune_until_clean(files, toolchain_, ws, lang_, options_.prune_rounds);
  artifact.removed_non_compiling = pruned.removed_methods;
  artifact.removed_files = pruned.removed_files;
  artifact.removed_tests_in_files = pruned.removed_tests_in_files;
  artifact.per_test_verdicts = pruned.not_compiled;

  std::vector<TestVerdict> verdicts =
      files.empty() ? std::vector<TestVerdict>{} : toolchain_.run_tests(ws, files);
  for (auto& v : verdicts) artifact.per_test_verdicts.push_back(std::move(v));
  artifact.files = std::move(files);
  return artifact;
}

GenerationRun Orchestrator::execute_units(GranularityMode mode,
                                          const std::vector<UnitUnderTest>& units) {
  GenerationRun run;
  run.mode = mode;
  run.project_root = project_.root_path;

  struct Slot {
    TestSuiteArtifact artifact;
    long requests = 0;
  };
  std::vector<Slot> slots(units.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= units.size()) return;
      {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (fatal) return;
      }
      ChatSession session = new_session(units[k]);
      try {
        slots[k].artifact = generate_for_unit(units[k], session);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
      slots[k].requests = session.counted_requests;
    }
  };

  int n_workers = std::max(1, options_.workers);
  if (n_workers == 1 || units.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t k = 0; k < units.size(); ++k) {
    Slot& slot = slots[k];
    run.ledger.requests_per_unit[units[k].id] = slot.requests;
    run.ledger.total_requests += slot.requests;
    run.ledger.generated_tests += slot.artifact.n_generated;
    run.ledger.passing_tests += slot.artifact.surviving_passing();
    if (slot.artifact.aborted) run.aborted_units.push_back(units[k].id);
    run.per_unit_artifacts.emplace(units[k].id, std::move(slot.artifact));
  }
  std::sort(run.aborted_units.begin(), run.aborted_units.end());

  finalize_suite(run);
  return run;
}

void Orchestrator::finalize_suite(GenerationRun& run) {
  run.passing_suite.clear();
  for (const auto& [unit_id, artifact] : run.per_unit_artifacts) {
    for (auto& file : passing_suite_of(artifact, lang_)) {
      run.passing_suite.push_back(std::move(file));
    }
  }
  std::sort(run.passing_suite.begin(), run.passing_suite.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.name < b.name; });

  Workspace ws = unit_workspace();
  try {
    run.coverage = toolchain_.coverage(ws, run.passing_suite);
  } catch (const CoverageUnavailable&) {
    run.coverage.reset();
  }
  try {
    run.mutation = toolchain_.mutation_score(ws, run.passing_suite);
  } catch (const CoverageUnavailable&) {
    run.mutation.reset();
  } catch (const Error&) {
    run.mutation.reset();
  }
}

GenerationRun Orchestrator::run_class_level() {
  return execute_units(GranularityMode::ClassLevel, class_units());
}

GenerationRun Orchestrator::run_method_level() {
  return execute_units(GranularityMode::MethodLevel, method_units());
}

GenerationRun Orchestrator::run_hybrid() {
  GenerationRun phase1 = execute_units(GranularityMode::ClassLevel, class_units());

  std::vector<UnitUnderTest> targets;
  bool fallback = false;
  if (phase1.coverage) {
    targets = hybrid_phase2_units(*phase1.coverage);
  } else {
    targets = method_units();  // coverage unavailable: full method level
    fallback = true;
  }
  GenerationRun phase2 = execute_units(GranularityMode::MethodLevel, targets);

  GenerationRun merged = combine(phase1, phase2);
  merged.mode = GranularityMode::Hybrid;
  merged.hybrid_coverage_fallback = fallback;
  return merged;
}

GenerationRun Orchestrator::run(GranularityMode mode) {
  switch (mode) {
    case GranularityMode::ClassLevel: return run_class_level();
    case GranularityMode::MethodLevel: return run_method_level();
    case GranularityMode::Hybrid: return run_hybrid();
    case GranularityMode::Combined: {
      GenerationRun by_class = run_class_level();
      GenerationRun by_method = run_method_level();
      return combine(by_class, by_method);
    }
  }
  throw InputError("unhandled mode");
}

GenerationRun Orchestrator::combine(const GenerationRun& class_run,
                                    const GenerationRun& method_run) {
  if (class_run.project_root != method_run.project_root) {
    throw InputError("cannot combine runs over different projects: '" + class_run.project_root +
                     "' vs '" + method_run.project_root + "'");
  }

  GenerationRun merged;
  merged.mode = GranularityMode::Combined;
  merged.project_root = class_run.project_root;

  merged.per_unit_artifacts = class_run.per_unit_artifacts;
  for (const auto& [id, artifact] : method_run.per_unit_artifacts) {
    merged.per_unit_artifacts.emplace(id, artifact);
  }

  for (const auto* run : {&class_run, &method_run}) {
    for (const auto& [id, n] : run->ledger.requests_per_unit) {
      merged.ledger.requests_per_unit[id] += n;
    }
    merged.ledger.total_requests += run->ledger.total_requests;
    merged.ledger.generated_tests += run->ledger.generated_tests;
    merged.ledger.passing_tests += run->ledger.passing_tests;
    for (const auto& id : run->aborted_units) merged.aborted_units.push_back(id);
  }
  std::sort(merged.aborted_units.begin(), merged.aborted_units.end());
  merged.aborted_units.erase(std::unique(merged.aborted_units.begin(), merged.aborted_units.end()),
                             merged.aborted_units.end());

  // Coverage is computed over the union before any collision renaming so it
  // matches what the tests actually exercised in their own runs.
  std::vector<SourceFile> union_suite = class_run.passing_suite;
  for (const auto& f : method_run.passing_suite) union_suite.push_back(f);
  std::sort(union_suite.begin(), union_suite.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.name < b.name; });

  Workspace ws = unit_workspace();
  try {
    merged.coverage = toolchain_.coverage(ws, union_suite);
  } catch (const CoverageUnavailable&) {
    merged.coverage.reset();
  }
  try {
    merged.mutation = toolchain_.mutation_score(ws, union_suite);
  } catch (const Error&) {
    merged.mutation.reset();
  }

  // Materialized suite: identical file names across origins get a suffix.
  std::set<std::string> class_names;
  for (const auto& f : class_run.passing_suite) class_names.insert(f.name);
  std::set<std::string> method_names;
  for (const auto& f : method_run.passing_suite) method_names.insert(f.name);

  auto add_with_suffix = [&](const SourceFile& file, const char* suffix) {
    std::string stem = file.name;
    std::string ext;
    auto dot = stem.rfind('.');
    if (dot != std::string::npos) {
      ext = stem.substr(dot);
      stem = stem.substr(0, dot);
    }
    auto slash = stem.find_last_of('/');
    std::string old_class = slash == std::string::npos ? stem : stem.substr(slash + 1);
    std::string new_class = old_class + suffix;
    // Reuse identity alignment for the rename, keeping the file's own package.
    std::string package;
    try {
      java::ParseOptions opts;
      opts.tolerant = true;
      package = java::parse_compilation_unit(file.content, opts).package;
    } catch (const ParseError&) {
    }
    AlignOutcome renamed = align_identity(file.content, new_class, package, lang_);
    merged.passing_suite.push_back(SourceFile{stem + suffix + ext, renamed.source});
  };

  for (const auto& f : class_run.passing_suite) {
    if (method_names.count(f.name)) {
      add_with_suffix(f, "_c");
    } else {
      merged.passing_suite.push_back(f);
    }
  }
  for (const auto& f : method_run.passing_suite) {
    if (class_names.count(f.name)) {
      add_with_suffix(f, "_m");
    } else {
      merged.passing_suite.push_back(f);
    }
  }
  std::sort(merged.passing_suite.begin(), merged.passing_suite.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.name < b.name; });
  return merged;
}

std::vector<SourceFile> passing_suite_of(const TestSuiteArtifact& artifact,
                                         const LanguageSpec& lang) {
  std::vector<SourceFile> out;
  if (artifact.aborted) return out;

  std::set<std::pair<std::string, std::string>> failed;
  for (const auto& v : artifact.per_test_verdicts) {
    if (v.status == VerdictStatus::Failed) failed.insert({v.file, v.method});
  }

  for (const auto& file : artifact.files) {
    std::string content = file.content;
    if (!failed.empty()) {
      java::ParseOptions opts;
      opts.tolerant = true;
      opts.test_markers = lang.test_markers;
      java::CompilationUnit cu;
      try {
        cu = java::parse_compilation_unit(content, opts);
      } catch (const ParseError&) {
        continue;
      }
      std::vector<std::pair<std::size_t, std::size_t>> cuts;
      java::visit_types(cu.types, [&](const java::TypeInfo& t) {
        for (const auto& m : t.members) {
          if (m.is_test_method && failed.count({file.name, m.name})) {
            cuts.emplace_back(m.begin, m.end);
          }
        }
      });
      std::sort(cuts.rbegin(), cuts.rend());
      for (const auto& [b, e] : cuts) {
        std::size_t end = e;
        if (end < content.size() && content[end] == '\n') ++end;
        content.erase(b, end - b);
      }
    }
    if (count_test_methods(content, lang) == 0) continue;
    out.push_back(SourceFile{file.name, std::move(content)});
  }
  return out;
}

Json run_to_json(const GenerationRun& run) {
  Json j;
  j["mode"] = to_string(run.mode);
  j["project_root"] = run.project_root;
  Json ledger;
  ledger["total_requests"] = run.ledger.total_requests;
  ledger["generated_tests"] = run.ledger.generated_tests;
  ledger["passing_tests"] = run.ledger.passing_tests;
  Json per_unit = Json::object();
  for (const auto& [id, n] : run.ledger.requests_per_unit) per_unit[id] = n;
  ledger["requests_per_unit"] = std::move(per_unit);
  j["ledger"] = std::move(ledger);
  j["coverage"] = run.coverage ? coverage_to_json(*run.coverage) : Json(nullptr);
  j["mutation"] = run.mutation ? mutation_to_json(*run.mutation) : Json(nullptr);
  j["hybrid_coverage_fallback"] = run.hybrid_coverage_fallback;
  j["aborted_units"] = run.aborted_units;
  Json units = Json::array();
  for (const auto& [id, artifact] : run.per_unit_artifacts) {
    units.push_back(sanitizer_report_to_json(artifact));
  }
  j["units"] = std::move(units);
  Json suite = Json::array();
  for (const auto& f : run.passing_suite) suite.push_back(f.name);
  j["passing_suite"] = std::move(suite);
  return j;
}

}  // namespace testgen

#include "testgen/toolchain.hpp"

#include "testgen/errors.hpp"
#include "testgen/java_units.hpp"

#include <algorithm>
#include <sstream>

namespace testgen {

std::string to_string(DiagKind kind) {
  switch (kind) {
    case DiagKind::CompileError: return "compile_error";
    case DiagKind::NameMismatch: return "name_mismatch";
    case DiagKind::ImportError: return "import_error";
    case DiagKind::Other: return "other";
  }
  return "other";
}

DiagKind diag_kind_from_string(const std::string& s) {
  if (s == "compile_error") return DiagKind::CompileError;
  if (s == "name_mismatch") return DiagKind::NameMismatch;
  if (s == "import_error") return DiagKind::ImportError;
  if (s == "other") return DiagKind::Other;
  throw InputError("unknown diagnostic kind: " + s);
}

std::string to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::Passed: return "passed";
    case VerdictStatus::Failed: return "failed";
    case VerdictStatus::NotCompiled: return "not_compiled";
  }
  return "failed";
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << d.file;
    if (d.line) {
      out << ":" << *d.line;
      if (d.column) out << ":" << *d.column;
    }
    out << ": error: " << d.message << "\n";
  }
  return out.str();
}

Json diagnostic_to_json(const Diagnostic& d) {
  Json j;
  j["file"] = d.file;
  if (d.line) j["line"] = *d.line;
  if (d.column) j["column"] = *d.column;
  j["kind"] = to_string(d.kind);
  j["message"] = d.message;
  if (d.attributed_test) j["attributed_test"] = *d.attributed_test;
  return j;
}

Diagnostic diagnostic_from_json(const Json& j) {
  Diagnostic d;
  d.file = j.value("file", "");
  if (j.contains("line")) d.line = j["line"].get<int>();
  if (j.contains("column")) d.column = j["column"].get<int>();
  d.kind = diag_kind_from_string(j.value("kind", "compile_error"));
  d.message = j.value("message", "");
  if (j.contains("attributed_test")) d.attributed_test = j["attributed_test"].get<std::string>();
  return d;
}

Json verdict_to_json(const TestVerdict& v) {
  Json j;
  j["file"] = v.file;
  j["method"] = v.method;
  j["status"] = to_string(v.status);
  if (!v.failure_message.empty()) j["message"] = v.failure_message;
  return j;
}

TestVerdict verdict_from_json(const Json& j) {
  TestVerdict v;
  v.file = j.at("file").get<std::string>();
  v.method = j.at("method").get<std::string>();
  std::string s = j.at("status").get<std::string>();
  if (s == "passed") v.status = VerdictStatus::Passed;
  else if (s == "failed") v.status = VerdictStatus::Failed;
  else if (s == "not_compiled") v.status = VerdictStatus::NotCompiled;
  else throw InputError("unknown verdict status: " + s);
  v.failure_message = j.value("message", "");
  return v;
}

Json coverage_to_json(const CoverageSnapshot& c) {
  Json j;
  j["lines_total"] = c.lines_total;
  j["lines_covered"] = c.lines_covered;
  j["branches_total"] = c.branches_total;
  j["branches_covered"] = c.branches_covered;
  Json pmb = Json::object();
  for (const auto& [k, v] : c.per_method_branches) pmb[k] = Json::array({v.first, v.second});
  j["per_method_branches"] = std::move(pmb);
  Json pml = Json::object();
  for (const auto& [k, v] : c.per_method_lines) pml[k] = Json::array({v.first, v.second});
  j["per_method_lines"] = std::move(pml);
  return j;
}

CoverageSnapshot coverage_from_json(const Json& j) {
  CoverageSnapshot c;
  c.lines_total = j.value("lines_total", 0L);
  c.lines_covered = j.value("lines_covered", 0L);
  c.branches_total = j.value("branches_total", 0L);
  c.branches_covered = j.value("branches_covered", 0L);
  if (j.contains("per_method_branches")) {
    for (const auto& [k, v] : j["per_method_branches"].items()) {
      c.per_method_branches[k] = {v.at(0).get<long>(), v.at(1).get<long>()};
    }
  }
  if (j.contains("per_method_lines")) {
    for (const auto& [k, v] : j["per_method_lines"].items()) {
      c.per_method_lines[k] = {v.at(0).get<long>(), v.at(1).get<long>()};
    }
  }
  return c;
}

Json mutation_to_json(const MutationSnapshot& m) {
  return Json{{"mutants_total", m.mutants_total}, {"mutants_killed", m.mutants_killed}};
}

MutationSnapshot mutation_from_json(const Json& j) {
  MutationSnapshot m;
  m.mutants_total = j.value("mutants_total", 0L);
  m.mutants_killed = j.value("mutants_killed", 0L);
  return m;
}

// --- simulated toolchain -----------------------------------------------------

namespace {

std::string basename_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

// Script lookups accept either the workspace-relative name or the basename.
const Json* lookup(const Json& table, const std::string& key) {
  if (!table.is_object()) return nullptr;
  auto it = table.find(key);
  if (it != table.end()) return &*it;
  it = table.find(basename_of(key));
  if (it != table.end()) return &*it;
  return nullptr;
}

const Json* lookup_test(const Json& table, const std::string& file, const std::string& method) {
  if (!table.is_object()) return nullptr;
  auto it = table.find(file + "::" + method);
  if (it != table.end()) return &*it;
  it = table.find(basename_of(file) + "::" + method);
  if (it != table.end()) return &*it;
  return nullptr;
}

struct MarkerHit {
  std::size_t pos;
  std::string payload;  // for REF markers
};

std::vector<std::size_t> find_all(const std::string& text, const std::string& needle) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    out.push_back(pos);
    pos += needle.size();
  }
  return out;
}

std::vector<MarkerHit> find_refs(const std::string& text) {
  static const std::string kOpen = "/*REF:";
  std::vector<MarkerHit> out;
  std::size_t pos = 0;
  while ((pos = text.find(kOpen, pos)) != std::string::npos) {
    std::size_t end = text.find("*/", pos + kOpen.size());
    if (end == std::string::npos) break;
    out.push_back(MarkerHit{pos, text.substr(pos + kOpen.size(), end - pos - kOpen.size())});
    pos = end + 2;
  }
  return out;
}

struct MemberLoc {
  const java::TypeInfo* type;
  const java::MemberInfo* member;  // null: position owned by the type itself
};

// Innermost owner of a byte position: a member, else the deepest type.
std::optional<MemberLoc> locate(const std::vector<java::TypeInfo>& types, std::size_t pos) {
  for (const auto& t : types) {
    if (pos < t.begin || pos >= t.end) continue;
    if (auto nested = locate(t.nested, pos)) return nested;
    for (const auto& m : t.members) {
      if (pos >= m.begin && pos < m.end) return MemberLoc{&t, &m};
    }
    return MemberLoc{&t, nullptr};
  }
  return std::nullopt;
}

void collect_type_names(const std::vector<java::TypeInfo>& types, std::set<std::string>& out) {
  for (const auto& t : types) {
    out.insert(t.name);
    collect_type_names(t.nested, out);
  }
}

}  // namespace

SimulatedToolchain::SimulatedToolchain(Json script, const LanguageSpec& lang) : lang_(lang) {
  // Sections are snapshotted so queries never touch the shared document;
  // workers call the four operations concurrently.
  if (script.contains("compile_outcomes")) compile_outcomes_ = script["compile_outcomes"];
  if (script.contains("test_verdicts")) test_verdicts_ = script["test_verdicts"];
  if (script.contains("coverage_tables")) coverage_tables_ = script["coverage_tables"];
  if (script.contains("mutant_kill_map")) mutant_kill_map_ = script["mutant_kill_map"];
  strict_ = script.value("strict", false);
  coverage_error_ = script.value("coverage_error", false);
  if (script.contains("project")) {
    const Json& p = script["project"];
    lines_total_ = p.value("lines_total", 0L);
    branches_total_ = p.value("branches_total", 0L);
    mutants_total_ = p.value("mutants_total", 0L);
    if (p.contains("methods")) {
      for (const auto& [key, m] : p["methods"].items()) {
        MethodScope scope;
        scope.branches = m.value("branches", 0L);
        if (m.contains("lines")) {
          for (const auto& ln : m["lines"]) scope.lines.insert(ln.get<long>());
        }
        methods_[key] = std::move(scope);
      }
    }
  }
}

std::unique_ptr<SimulatedToolchain> SimulatedToolchain::from_file(const std::string& path,
                                                                  const LanguageSpec& lang) {
  return std::make_unique<SimulatedToolchain>(load_json_file(path), lang);
}

std::vector<Diagnostic> SimulatedToolchain::compile(const Workspace& ws,
                                                    const std::vector<SourceFile>& files) {
  (void)ws;
  std::vector<Diagnostic> diags;

  // Names visible to /*REF:...*/ resolution: every type declared in the
  // submitted files plus the production model.
  std::set<std::string> visible;
  std::vector<java::CompilationUnit> parsed(files.size());
  std::vector<bool> parse_ok(files.size(), true);
  java::ParseOptions opts;
  opts.tolerant = true;
  opts.test_markers = lang_.test_markers;
  for (std::size_t k = 0; k < files.size(); ++k) {
    try {
      parsed[k] = java::parse_compilation_unit(files[k].content, opts);
      collect_type_names(parsed[k].types, visible);
    } catch (const ParseError&) {
      parse_ok[k] = false;
    }
  }
  if (ws.project != nullptr) {
    for (const auto& name : ws.project->production_simple_names()) visible.insert(name);
  }

  for (std::size_t k = 0; k < files.size(); ++k) {
    const SourceFile& file = files[k];
    if (const Json* outcome = lookup(compile_outcomes_, file.name)) {
      for (const auto& jd : *outcome) {
        Diagnostic d = diagnostic_from_json(jd);
        if (d.file.empty()) d.file = file.name;
        diags.push_back(std::move(d));
      }
      continue;
    }

    if (!parse_ok[k]) {
      diags.push_back(Diagnostic{file.name, std::nullopt, std::nullopt, DiagKind::CompileError,
                                 "reached end of file while parsing", std::nullopt});
      continue;
    }
    if (file.content.find("/*BAD_IMPORT*/") != std::string::npos) {
      diags.push_back(Diagnostic{file.name, std::nullopt, std::nullopt, DiagKind::ImportError,
                                 "package does.not.exist does not exist", std::nullopt});
      continue;
    }

    auto attribute = [&](std::size_t pos, const std::string& message) {
      auto loc = locate(parsed[k].types, pos);
      Diagnostic d;
      d.file = file.name;
      d.kind = DiagKind::CompileError;
      d.message = message;
      if (loc && loc->member != nullptr) {
        d.line = loc->member->line;
        if (loc->member->is_test_method) d.attributed_test = loc->member->name;
      } else if (loc) {
        d.line = loc->type->line;
      }
      diags.push_back(std::move(d));
    };

    for (std::size_t pos : find_all(file.content, "/*BAD*/")) {
      attribute(pos, "illegal start of expression");
    }
    for (const auto& ref : find_refs(file.content)) {
      if (!visible.count(ref.payload)) {
        attribute(ref.pos, "cannot find symbol: class " + ref.payload);
      }
    }
  }
  return diags;
}

std::vector<TestVerdict> SimulatedToolchain::enumerate_tests(const SourceFile& file) const {
  std::vector<TestVerdict> out;
  java::ParseOptions opts;
  opts.tolerant = true;
  opts.test_markers = lang_.test_markers;
  java::CompilationUnit cu;
  try {
    cu = java::parse_compilation_unit(file.content, opts);
  } catch (const ParseError&) {
    return out;
  }
  java::visit_types(cu.types, [&](const java::TypeInfo& t) {
    for (const auto& m : t.members) {
      if (!m.is_test_method) continue;
      TestVerdict v;
      v.file = file.name;
      v.method = m.name;
      std::string slice = file.content.substr(m.begin, m.end - m.begin);
      if (slice.find("/*FAILS*/") != std::string::npos) {
        v.status = VerdictStatus::Failed;
        v.failure_message = "org.opentest4j.AssertionFailedError: expected result mismatch";
      }
      out.push_back(std::move(v));
    }
  });
  return out;
}

std::vector<TestVerdict> SimulatedToolchain::run_tests(const Workspace& ws,
                                                       const std::vector<SourceFile>& files) {
  (void)ws;
  std::vector<TestVerdict> out;
  for (const auto& file : files) {
    for (TestVerdict v : enumerate_tests(file)) {
      if (const Json* entry = lookup_test(test_verdicts_, v.file, v.method)) {
        std::string status = entry->is_string() ? entry->get<std::string>()
                                                : entry->value("status", "passed");
        if (status == "failed") {
          v.status = VerdictStatus::Failed;
          v.failure_message = entry->is_object()
                                  ? entry->value("message", "assertion failed")
                                  : "org.opentest4j.AssertionFailedError: assertion failed";
        } else if (status == "passed") {
          v.status = VerdictStatus::Passed;
          v.failure_message.clear();
        } else {
          throw ToolchainDesync("script verdict for " + v.file + "::" + v.method +
                                " has unknown status: " + status);
        }
      } else if (strict_) {
        throw ToolchainDesync("no scripted verdict for " + v.file + "::" + v.method);
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

CoverageSnapshot SimulatedToolchain::coverage(const Workspace& ws,
                                              const std::vector<SourceFile>& suite) {
  (void)ws;
  if (coverage_error_) {
    throw CoverageUnavailable("simulated instrumentation failure");
  }
  std::set<long> lines;
  std::set<std::string> branches;
  for (const auto& file : suite) {
    for (const TestVerdict& t : enumerate_tests(file)) {
      const Json* entry = lookup_test(coverage_tables_, t.file, t.method);
      if (entry == nullptr) {
        if (strict_) {
          throw ToolchainDesync("no scripted coverage for " + t.file + "::" + t.method);
        }
        continue;
      }
      if (entry->contains("lines")) {
        for (const auto& ln : (*entry)["lines"]) lines.insert(ln.get<long>());
      }
      if (entry->contains("branches")) {
        for (const auto& b : (*entry)["branches"]) branches.insert(b.get<std::string>());
      }
    }
  }

  CoverageSnapshot snap;
  snap.lines_total = lines_total_;
  snap.branches_total = branches_total_;
  snap.lines_covered = std::min<long>(static_cast<long>(lines.size()), lines_total_);
  snap.branches_covered = std::min<long>(static_cast<long>(branches.size()), branches_total_);
  for (const auto& [key, scope] : methods_) {
    long covered_branches = 0;
    std::string prefix = key + ":";
    for (const auto& b : branches) {
      if (b.rfind(prefix, 0) == 0) ++covered_branches;
    }
    snap.per_method_branches[key] = {std::min(covered_branches, scope.branches), scope.branches};
    long covered_lines = 0;
    for (long ln : scope.lines) {
      if (lines.count(ln)) ++covered_lines;
    }
    snap.per_method_lines[key] = {covered_lines, static_cast<long>(scope.lines.size())};
  }
  return snap;
}

MutationSnapshot SimulatedToolchain::mutation_score(const Workspace& ws,
                                                    const std::vector<SourceFile>& suite) {
  (void)ws;
  std::set<long> killed;
  for (const auto& file : suite) {
    for (const TestVerdict& t : enumerate_tests(file)) {
      const Json* entry = lookup_test(mutant_kill_map_, t.file, t.method);
      if (entry == nullptr) {
        if (strict_) {
          throw ToolchainDesync("no scripted mutants for " + t.file + "::" + t.method);
        }
        continue;
      }
      for (const auto& m : *entry) killed.insert(m.get<long>());
    }
  }
  MutationSnapshot snap;
  snap.mutants_total = mutants_total_;
  snap.mutants_killed = std::min<long>(static_cast<long>(killed.size()), mutants_total_);
  return snap;
}

}  // namespace testgen

#include "testgen/sanitizer.hpp"

#include "testgen/errors.hpp"
#include "testgen/java_units.hpp"
#include "testgen/lexer.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace testgen {

ExtraContentStats& ExtraContentStats::operator+=(const ExtraContentStats& o) {
  additional_classes += o.additional_classes;
  additional_interfaces += o.additional_interfaces;
  overriding_classes += o.overriding_classes;
  empty_placeholder_classes += o.empty_placeholder_classes;
  return *this;
}

int TestSuiteArtifact::n_non_passing() const {
  int n = 0;
  for (const auto& v : per_test_verdicts) {
    if (v.status == VerdictStatus::Failed) ++n;
  }
  return n;
}

int TestSuiteArtifact::surviving_passing() const {
  int n = 0;
  for (const auto& v : per_test_verdicts) {
    if (v.status == VerdictStatus::Passed) ++n;
  }
  return n;
}

namespace {

struct Edit {
  std::size_t begin;
  std::size_t end;
  std::string text;
};

std::string apply_edits(std::string source, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    if (a.begin != b.begin) return a.begin > b.begin;
    return a.end > b.end;
  });
  for (const auto& e : edits) {
    source.replace(e.begin, e.end - e.begin, e.text);
  }
  return source;
}

java::ParseOptions tolerant_options(const LanguageSpec& lang) {
  java::ParseOptions opts;
  opts.tolerant = true;
  opts.test_markers = lang.test_markers;
  return opts;
}

int count_tests_in(const std::vector<java::TypeInfo>& types) {
  int n = 0;
  java::visit_types(types, [&](const java::TypeInfo& t) {
    for (const auto& m : t.members) {
      if (m.is_test_method) ++n;
    }
  });
  return n;
}

bool uses_test_marker(const std::vector<java::Token>& tokens, const LanguageSpec& lang) {
  for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
    if (tokens[k].kind != java::TokKind::Punct || tokens[k].text != "@") continue;
    const auto& name = tokens[k + 1];
    if (name.kind != java::TokKind::Ident) continue;
    if (std::find(lang.test_markers.begin(), lang.test_markers.end(), std::string(name.text)) !=
        lang.test_markers.end()) {
      return true;
    }
  }
  return false;
}

}  // namespace

int count_test_methods(const std::string& source, const LanguageSpec& lang) {
  try {
    auto cu = java::parse_compilation_unit(source, tolerant_options(lang));
    return count_tests_in(cu.types);
  } catch (const ParseError&) {
    return 0;
  }
}

// --- align_identity ----------------------------------------------------------

AlignOutcome align_identity(const std::string& file_source,
                            const std::string& expected_test_class_name,
                            const std::string& expected_package, const LanguageSpec& lang) {
  java::CompilationUnit cu;
  try {
    cu = java::parse_compilation_unit(file_source, tolerant_options(lang));
  } catch (const ParseError&) {
    return AlignOutcome{file_source, false};
  }
  if (cu.types.empty()) {
    return AlignOutcome{file_source, false};
  }

  std::vector<Edit> edits;

  // Package header. A missing header becomes a prepend; the import insert
  // below may join it so header order stays package-then-imports.
  std::string prepend;
  if (expected_package.empty()) {
    if (!cu.package.empty()) {
      std::size_t end = cu.package_end;
      if (end < file_source.size() && file_source[end] == '\n') ++end;
      edits.push_back(Edit{cu.package_begin, end, ""});
    }
  } else if (cu.package.empty()) {
    prepend = "package " + expected_package + ";\n\n";
  } else if (cu.package != expected_package) {
    edits.push_back(Edit{cu.package_begin, cu.package_end, "package " + expected_package + ";"});
  }

  // Primary test class: prefer an exact name match, then the type holding
  // the most test methods, then the first declaration.
  const java::TypeInfo* primary = nullptr;
  for (const auto& t : cu.types) {
    if (t.name == expected_test_class_name) {
      primary = &t;
      break;
    }
  }
  if (primary == nullptr) {
    int best = -1;
    for (const auto& t : cu.types) {
      int tests = count_tests_in({t});
      if (tests > best) {
        best = tests;
        primary = &t;
      }
    }
  }

  auto tokens = java::lex(file_source);

  if (primary != nullptr && primary->name != expected_test_class_name) {
    const std::string old_name = primary->name;
    for (const auto& tok : tokens) {
      if (tok.kind == java::TokKind::Ident && tok.text == old_name) {
        edits.push_back(Edit{tok.begin, tok.end, expected_test_class_name});
      }
    }
  }

  // Framework import, only when a marker is used without any framework import.
  bool has_framework_import = false;
  for (const auto& imp : cu.imports) {
    if (imp.path.rfind(lang.framework_import_prefix, 0) == 0) {
      has_framework_import = true;
      break;
    }
  }
  if (!has_framework_import && uses_test_marker(tokens, lang)) {
    if (!cu.imports.empty()) {
      std::size_t insert_at = cu.imports.back().end;
      while (insert_at < file_source.size() && file_source[insert_at] != '\n') ++insert_at;
      if (insert_at < file_source.size()) ++insert_at;
      edits.push_back(Edit{insert_at, insert_at, lang.framework_import + "\n"});
    } else if (!cu.package.empty()) {
      std::size_t insert_at = cu.package_end;
      while (insert_at < file_source.size() && file_source[insert_at] != '\n') ++insert_at;
      if (insert_at < file_source.size()) ++insert_at;
      edits.push_back(Edit{insert_at, insert_at, "\n" + lang.framework_import + "\n"});
    } else {
      prepend += lang.framework_import + "\n\n";
    }
  }
  if (!prepend.empty()) {
    edits.push_back(Edit{0, 0, std::move(prepend)});
  }

  return AlignOutcome{apply_edits(file_source, std::move(edits)), true};
}

// --- prune -------------------------------------------------------------------

namespace {

std::string basename_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

struct FileIndex {
  bool parsed = false;
  java::CompilationUnit cu;
  std::vector<int> line_starts;  // unused when diagnostics carry offsets
};

struct Removal {
  std::size_t begin;
  std::size_t end;
  bool is_test_method;
  std::string method_name;
};

// Innermost member or type declaration containing the 1-based line.
struct Located {
  const java::MemberInfo* member = nullptr;
  const java::TypeInfo* type = nullptr;  // declaration that should be dropped
  bool inside_primary_body = false;      // line hit a type but no member
};

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') ++line;
  }
  return line;
}

int end_line_of(const std::string& text, std::size_t offset) { return line_of_offset(text, offset); }

const java::TypeInfo* find_type_for_line(const std::vector<java::TypeInfo>& types,
                                         const std::string& content, int line,
                                         const java::TypeInfo** innermost) {
  for (const auto& t : types) {
    int first = t.line;
    int last = end_line_of(content, t.end == 0 ? 0 : t.end - 1);
    if (line < first || line > last) continue;
    *innermost = &t;
    const java::TypeInfo* deeper = nullptr;
    find_type_for_line(t.nested, content, line, &deeper);
    if (deeper != nullptr) *innermost = deeper;
    return *innermost;
  }
  return nullptr;
}

const java::MemberInfo* find_member_for_line(const java::TypeInfo& type,
                                             const std::string& content, int line) {
  for (const auto& m : type.members) {
    int first = m.line;
    int last = end_line_of(content, m.end == 0 ? 0 : m.end - 1);
    if (line >= first && line <= last) return &m;
  }
  return nullptr;
}

const java::MemberInfo* find_member_by_name(const std::vector<java::TypeInfo>& types,
                                            const std::string& name) {
  const java::MemberInfo* found = nullptr;
  java::visit_types(types, [&](const java::TypeInfo& t) {
    if (found != nullptr) return;
    for (const auto& m : t.members) {
      if (m.name == name) {
        found = &m;
        return;
      }
    }
  });
  return found;
}

}  // namespace

PruneStats prune_non_compiling(std::vector<SourceFile>& files,
                               const std::vector<Diagnostic>& diagnostics,
                               const LanguageSpec& lang) {
  PruneStats stats;
  if (diagnostics.empty()) return stats;

  std::map<std::string, std::vector<const Diagnostic*>> by_file;
  for (const auto& d : diagnostics) {
    by_file[basename_of(d.file)].push_back(&d);
  }

  std::vector<SourceFile> survivors;
  survivors.reserve(files.size());

  for (auto& file : files) {
    auto it = by_file.find(basename_of(file.name));
    if (it == by_file.end()) {
      survivors.push_back(std::move(file));
      continue;
    }

    java::CompilationUnit cu;
    bool parsed = true;
    try {
      cu = java::parse_compilation_unit(file.content, tolerant_options(lang));
    } catch (const ParseError&) {
      parsed = false;
    }

    bool drop_file = !parsed;
    std::vector<Removal> removals;

    for (const Diagnostic* d : it->second) {
      if (drop_file) break;
      if (d->kind == DiagKind::ImportError || d->kind == DiagKind::NameMismatch ||
          d->kind == DiagKind::Other) {
        drop_file = true;
        break;
      }
      if (d->attributed_test) {
        const java::MemberInfo* m = find_member_by_name(cu.types, *d->attributed_test);
        if (m == nullptr) {
          drop_file = true;
          break;
        }
        removals.push_back(Removal{m->begin, m->end, m->is_test_method, m->name});
        continue;
      }
      if (!d->line) {
        drop_file = true;  // unattributable condemns the whole file
        break;
      }
      const java::TypeInfo* innermost = nullptr;
      find_type_for_line(cu.types, file.content, *d->line, &innermost);
      if (innermost == nullptr) {
        drop_file = true;  // header/imports region
        break;
      }
      if (const java::MemberInfo* m = find_member_for_line(*innermost, file.content, *d->line)) {
        removals.push_back(Removal{m->begin, m->end, m->is_test_method, m->name});
        continue;
      }
      // The line belongs to a type body outside any member. A declaration
      // without test methods is a helper and is removed whole; a hit on the
      // test class itself (fields, class header) condemns the file.
      if (count_tests_in({*innermost}) > 0) {
        drop_file = true;
        break;
      }
      removals.push_back(Removal{innermost->begin, innermost->end, false, innermost->name});
    }

    if (drop_file) {
      ++stats.removed_files;
      int lost = parsed ? count_tests_in(cu.types) : 0;
      stats.removed_tests_in_files += lost;
      if (parsed) {
        java::visit_types(cu.types, [&](const java::TypeInfo& t) {
          for (const auto& m : t.members) {
            if (!m.is_test_method) continue;
            TestVerdict v;
            v.file = file.name;
            v.method = m.name;
            v.status = VerdictStatus::NotCompiled;
            v.failure_message = "removed with file: " + (*it->second.front()).message;
            stats.not_compiled.push_back(std::move(v));
          }
        });
      }
      continue;
    }

    // Deduplicate overlapping removals (two diagnostics on one method).
    std::sort(removals.begin(), removals.end(),
              [](const Removal& a, const Removal& b) { return a.begin < b.begin; });
    std::vector<Removal> merged;
    for (const auto& r : removals) {
      if (!merged.empty() && r.begin < merged.back().end) {
        merged.back().end = std::max(merged.back().end, r.end);
        continue;
      }
      merged.push_back(r);
    }

    std::vector<Edit> edits;
    for (const auto& r : merged) {
      if (r.is_test_method) {
        ++stats.removed_methods;
        TestVerdict v;
        v.file = file.name;
        v.method = r.method_name;
        v.status = VerdictStatus::NotCompiled;
        v.failure_message = "removed: does not compile";
        stats.not_compiled.push_back(std::move(v));
      } else {
        ++stats.removed_helpers;
      }
      std::size_t end = r.end;
      while (end < file.content.size() && (file.content[end] == '\n' || file.content[end] == ' ')) {
        if (file.content[end] == '\n') {
          ++end;
          break;
        }
        ++end;
      }
      edits.push_back(Edit{r.begin, end, ""});
    }
    if (!edits.empty()) {
      file.content = apply_edits(std::move(file.content), std::move(edits));
    }
    survivors.push_back(std::move(file));
  }

  files = std::move(survivors);
  return stats;
}

PruneStats prune_until_clean(std::vector<SourceFile>& files, Toolchain& toolchain,
                             const Workspace& ws, const LanguageSpec& lang, int max_rounds) {
  PruneStats total;
  auto accumulate = [&](PruneStats&& s) {
    total.removed_methods += s.removed_methods;
    total.removed_helpers += s.removed_helpers;
    total.removed_files += s.removed_files;
    total.removed_tests_in_files += s.removed_tests_in_files;
    for (auto& v : s.not_compiled) total.not_compiled.push_back(std::move(v));
  };

  for (int round = 0; round < max_rounds; ++round) {
    if (files.empty()) return total;
    std::vector<Diagnostic> diags = toolchain.compile(ws, files);
    if (diags.empty()) return total;
    accumulate(prune_non_compiling(files, diags, lang));
  }

  // Last resort: drop any file the toolchain still rejects.
  while (!files.empty()) {
    std::vector<Diagnostic> diags = toolchain.compile(ws, files);
    if (diags.empty()) break;
    std::set<std::string> bad;
    for (const auto& d : diags) bad.insert(basename_of(d.file));
    std::vector<SourceFile> survivors;
    for (auto& file : files) {
      if (!bad.count(basename_of(file.name))) {
        survivors.push_back(std::move(file));
        continue;
      }
      ++total.removed_files;
      int lost = count_test_methods(file.content, lang);
      total.removed_tests_in_files += lost;
      java::CompilationUnit cu;
      try {
        cu = java::parse_compilation_unit(file.content, tolerant_options(lang));
        java::visit_types(cu.types, [&](const java::TypeInfo& t) {
          for (const auto& m : t.members) {
            if (!m.is_test_method) continue;
            total.not_compiled.push_back(TestVerdict{file.name, m.name, VerdictStatus::NotCompiled,
                                                     "removed with file after repeated failures"});
          }
        });
      } catch (const ParseError&) {
      }
    }
    files = std::move(survivors);
  }
  return total;
}

// --- classification ----------------------------------------------------------

FailureCounts classify_failures(std::span<const TestVerdict> verdicts) {
  FailureCounts counts;
  counts.n_generated = static_cast<int>(verdicts.size());
  for (const auto& v : verdicts) {
    switch (v.status) {
      case VerdictStatus::NotCompiled: ++counts.n_non_compiling; break;
      case VerdictStatus::Failed: ++counts.n_non_passing; break;
      case VerdictStatus::Passed: break;
    }
  }
  return counts;
}

// --- extra content -----------------------------------------------------------

ExtraContentStats detect_extra_content(const std::vector<SourceFile>& files,
                                       const std::vector<std::string>& expected_class_names,
                                       const ProjectModel& project, const LanguageSpec& lang) {
  ExtraContentStats stats;
  const std::set<std::string> production = project.production_simple_names();

  for (std::size_t k = 0; k < files.size(); ++k) {
    const std::string expected = k < expected_class_names.size() ? expected_class_names[k] : "";
    java::CompilationUnit cu;
    try {
      cu = java::parse_compilation_unit(files[k].content, tolerant_options(lang));
    } catch (const ParseError&) {
      continue;
    }
    bool expected_seen = false;
    java::visit_types(cu.types, [&](const java::TypeInfo& t) {
      if (!expected_seen && t.name == expected) {
        expected_seen = true;  // the test class itself is never counted
        return;
      }
      if (t.kind == java::TypeKind::Interface || t.kind == java::TypeKind::Annotation) {
        ++stats.additional_interfaces;
        return;
      }
      ++stats.additional_classes;
      if (production.count(t.name)) ++stats.overriding_classes;
      if (!t.body_has_members) ++stats.empty_placeholder_classes;
    });
  }
  return stats;
}

Json sanitizer_report_to_json(const TestSuiteArtifact& artifact) {
  Json j;
  j["unit_id"] = artifact.unit_id;
  j["test_class_name"] = artifact.test_class_name;
  j["aborted"] = artifact.aborted;
  if (artifact.aborted) j["abort_reason"] = artifact.abort_reason;
  j["repair_rounds_used"] = artifact.repair_rounds_used;
  j["n_generated"] = artifact.n_generated;
  j["n_non_compiling"] = artifact.n_non_compiling();
  j["n_non_passing"] = artifact.n_non_passing();
  j["surviving_passing"] = artifact.surviving_passing();
  j["removed_non_compiling"] = artifact.removed_non_compiling;
  j["removed_files"] = artifact.removed_files;
  j["removed_tests_in_files"] = artifact.removed_tests_in_files;
  Json extra;
  extra["additional_classes"] = artifact.extra_content.additional_classes;
  extra["additional_interfaces"] = artifact.extra_content.additional_interfaces;
  extra["overriding_classes"] = artifact.extra_content.overriding_classes;
  extra["empty_placeholder_classes"] = artifact.extra_content.empty_placeholder_classes;
  j["extra_content"] = std::move(extra);
  Json verdicts = Json::array();
  for (const auto& v : artifact.per_test_verdicts) verdicts.push_back(verdict_to_json(v));
  j["verdicts"] = std::move(verdicts);
  Json files = Json::array();
  for (const auto& f : artifact.files) files.push_back(f.name);
  j["files"] = std::move(files);
  return j;
}

}  // namespace testgen

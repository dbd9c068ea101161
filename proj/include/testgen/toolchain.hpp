#pragma once

#include "testgen/jsonio.hpp"
#include "testgen/source_model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace testgen {

enum class DiagKind { CompileError, NameMismatch, ImportError, Other };

std::string to_string(DiagKind kind);
DiagKind diag_kind_from_string(const std::string& s);

struct Diagnostic {
  std::string file;
  std::optional<int> line;
  std::optional<int> column;
  DiagKind kind = DiagKind::CompileError;
  std::string message;
  std::optional<std::string> attributed_test;  // test-method name when known
};

// Verbatim text sent back to the model in repair prompts.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

enum class VerdictStatus { Passed, Failed, NotCompiled };

std::string to_string(VerdictStatus status);

struct TestVerdict {
  std::string file;
  std::string method;
  VerdictStatus status = VerdictStatus::Passed;
  std::string failure_message;
};

struct CoverageSnapshot {
  long lines_total = 0;
  long lines_covered = 0;
  long branches_total = 0;
  long branches_covered = 0;
  // method key -> (covered, total); keys are "<container>#<signature>".
  std::map<std::string, std::pair<long, long>> per_method_branches;
  std::map<std::string, std::pair<long, long>> per_method_lines;
};

struct MutationSnapshot {
  long mutants_total = 0;
  long mutants_killed = 0;
};

struct SourceFile {
  std::string name;  // workspace-relative path, '/' separators
  std::string content;
};

struct Workspace {
  std::string root;  // scratch directory; may be empty for the simulator
  const ProjectModel* project = nullptr;
};

class Toolchain {
public:
  virtual ~Toolchain() = default;

  // Empty result means every file compiles. Diagnostics are attributed to a
  // file and, when possible, to a test method.
  virtual std::vector<Diagnostic> compile(const Workspace& ws,
                                          const std::vector<SourceFile>& test_files) = 0;

  // One verdict per test method, in file order then source order.
  virtual std::vector<TestVerdict> run_tests(const Workspace& ws,
                                             const std::vector<SourceFile>& test_files) = 0;

  // Production-scope coverage of the given suite. Throws CoverageUnavailable
  // on instrumentation failure.
  virtual CoverageSnapshot coverage(const Workspace& ws,
                                    const std::vector<SourceFile>& passing_suite) = 0;

  virtual MutationSnapshot mutation_score(const Workspace& ws,
                                          const std::vector<SourceFile>& passing_suite) = 0;
};

// Deterministic scripted adapter. The script is a JSON document:
//
//   {
//     "strict": false,
//     "coverage_error": false,
//     "project": {
//       "lines_total": 100, "branches_total": 40, "mutants_total": 20,
//       "methods": {"pkg.Foo#bar(int)": {"branches": 4, "lines": [3,4,5]}}
//     },
//     "compile_outcomes": {"FooTest.java": [ {"kind": "compile_error", ...} ]},
//     "test_verdicts":    {"FooTest.java::testA": "failed"},
//     "coverage_tables":  {"FooTest.java::testA": {"lines": [1,2],
//                          "branches": ["pkg.Foo#bar(int):0"]}},
//     "mutant_kill_map":  {"FooTest.java::testA": [1,2]}
//   }
//
// Outcomes are pure functions of file content and the script, so calls on the
// same workspace are idempotent. Files without an explicit compile entry are
// judged by content markers: a member containing /*BAD*/ fails to compile, a
// member containing /*REF:Name*/ fails unless Name is declared in the suite or
// the production model, and /*BAD_IMPORT*/ anywhere fails the whole file. A
// test method containing /*FAILS*/ fails at run time. Coverage and mutant
// contributions are unioned over the suite's test ids ("file::method").
// In strict mode any query without an explicit script entry is a desync.
class SimulatedToolchain : public Toolchain {
public:
  SimulatedToolchain(Json script, const LanguageSpec& lang);
  static std::unique_ptr<SimulatedToolchain> from_file(const std::string& path,
                                                       const LanguageSpec& lang);

  std::vector<Diagnostic> compile(const Workspace& ws,
                                  const std::vector<SourceFile>& test_files) override;
  std::vector<TestVerdict> run_tests(const Workspace& ws,
                                     const std::vector<SourceFile>& test_files) override;
  CoverageSnapshot coverage(const Workspace& ws,
                            const std::vector<SourceFile>& passing_suite) override;
  MutationSnapshot mutation_score(const Workspace& ws,
                                  const std::vector<SourceFile>& passing_suite) override;

private:
  struct MethodScope {
    long branches = 0;
    std::set<long> lines;
  };

  std::vector<TestVerdict> enumerate_tests(const SourceFile& file) const;

  Json compile_outcomes_ = Json::object();
  Json test_verdicts_ = Json::object();
  Json coverage_tables_ = Json::object();
  Json mutant_kill_map_ = Json::object();
  LanguageSpec lang_;
  bool strict_ = false;
  bool coverage_error_ = false;
  long lines_total_ = 0;
  long branches_total_ = 0;
  long mutants_total_ = 0;
  std::map<std::string, MethodScope> methods_;
};

// Adapter that shells out to configured commands. Each command runs with the
// workspace root as working directory, '{workspace}' substituted, and must
// print a JSON document on stdout:
//   compile  -> {"diagnostics": [...]}
//   test     -> {"verdicts": [{"file","method","status","message"?}]}
//   coverage -> {"lines_total", "lines_covered", "branches_total",
//                "branches_covered", "per_method_branches": {k: [c,t]},
//                "per_method_lines": {k: [c,t]}}
//   mutation -> {"mutants_total", "mutants_killed"}
struct CommandToolchainConfig {
  std::string compile_command;
  std::string test_command;
  std::string coverage_command;
  std::string mutation_command;
  std::string test_dir;  // where test files are materialized, e.g. src/test/java
  int compile_timeout_s = 300;
  int test_timeout_s = 60;  // per test; scaled by suite size per invocation
};

std::unique_ptr<Toolchain> make_command_toolchain(CommandToolchainConfig config);

// JSON (de)serialization used by run.json and the command protocol.
Json diagnostic_to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const Json& j);
Json verdict_to_json(const TestVerdict& v);
TestVerdict verdict_from_json(const Json& j);
Json coverage_to_json(const CoverageSnapshot& c);
CoverageSnapshot coverage_from_json(const Json& j);
Json mutation_to_json(const MutationSnapshot& m);
MutationSnapshot mutation_from_json(const Json& j);

}  // namespace testgen

#pragma once

#include "testgen/llm.hpp"
#include "testgen/prompt.hpp"
#include "testgen/sanitizer.hpp"
#include "testgen/source_model.hpp"
#include "testgen/toolchain.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace testgen {

enum class GranularityMode { ClassLevel, MethodLevel, Combined, Hybrid };

std::string to_string(GranularityMode mode);
GranularityMode granularity_from_string(const std::string& s);

// A generation target: a whole container, one method, or the constructor
// group of a container.
struct UnitUnderTest {
  enum class Kind { Container, Method, ConstructorGroup };
  Kind kind = Kind::Container;
  std::string id;  // container qn | qn#name(sig) | qn#<init>
  std::string container_id;
  std::string method_name;       // Method units only
  std::string method_signature;  // Method units only
  std::string test_class_name;
};

struct RunLedger {
  std::map<std::string, long> requests_per_unit;
  long total_requests = 0;
  long generated_tests = 0;
  long passing_tests = 0;
};

struct GenerationRun {
  GranularityMode mode = GranularityMode::ClassLevel;
  std::string project_root;
  std::map<std::string, TestSuiteArtifact> per_unit_artifacts;
  RunLedger ledger;
  std::optional<CoverageSnapshot> coverage;
  std::optional<MutationSnapshot> mutation;
  std::vector<SourceFile> passing_suite;  // failed tests spliced out
  std::vector<std::string> aborted_units;
  bool hybrid_coverage_fallback = false;
};

struct OrchestratorOptions {
  std::string system_message;  // prepended to every session when non-empty
  int repair_limit = 5;
  int prune_rounds = 3;
  double temperature = 0.1;
  int workers = 4;
  bool include_abstract = true;  // abstract classes / interfaces as CUTs
  std::string class_test_name_pattern = "{class}Test";
  std::string method_test_name_pattern = "{class}_{method}_Test";
  std::string constructor_test_name_pattern = "{class}_Constructor_Test";
  std::string workspace_root;  // scratch base for command toolchains
};

class Orchestrator {
public:
  Orchestrator(const ProjectModel& project, Gateway& gateway, Toolchain& toolchain,
               const PromptFactory& prompts, const LanguageSpec& lang,
               OrchestratorOptions options = {});

  GenerationRun run(GranularityMode mode);
  GenerationRun run_class_level();
  GenerationRun run_method_level();
  GenerationRun run_hybrid();

  // Union of the passing suites of two runs over the same project; file
  // identity collisions get a deterministic origin suffix (_c / _m).
  // Coverage and mutation are recomputed on the union. Throws InputError
  // when the runs belong to different projects.
  GenerationRun combine(const GenerationRun& class_run, const GenerationRun& method_run);

  // The generate -> compile -> run -> repair loop of one unit, at most
  // repair_limit repair rounds, full history kept on the session.
  TestSuiteArtifact generate_for_unit(const UnitUnderTest& unit, ChatSession& session);

  ChatSession new_session(const UnitUnderTest& unit) const;
  std::vector<UnitUnderTest> class_units() const;
  std::vector<UnitUnderTest> method_units() const;
  // Method units restricted to branch-uncovered methods after phase 1; the
  // constructor pass is re-targeted only if its own scope is uncovered.
  std::vector<UnitUnderTest> hybrid_phase2_units(const CoverageSnapshot& phase1) const;

private:
  GenerationRun execute_units(GranularityMode mode, const std::vector<UnitUnderTest>& units);
  void finalize_suite(GenerationRun& run);
  std::string test_file_path(const ContainerUnit& container, const std::string& class_name) const;
  Workspace unit_workspace() const;

  const ProjectModel& project_;
  Gateway& gateway_;
  Toolchain& toolchain_;
  const PromptFactory& prompts_;
  const LanguageSpec& lang_;
  OrchestratorOptions options_;
};

// Passing tests only: failed test methods are spliced out of the surviving
// files; files left without any test method are dropped.
std::vector<SourceFile> passing_suite_of(const TestSuiteArtifact& artifact,
                                         const LanguageSpec& lang);

// Method coverage key used by toolchains: "<container>#<signature>".
std::string method_coverage_key(const std::string& container_id, const std::string& signature);
std::string constructor_coverage_key(const std::string& container_id);

Json run_to_json(const GenerationRun& run);

}  // namespace testgen

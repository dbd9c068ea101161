#pragma once

#include "testgen/source_model.hpp"
#include "testgen/toolchain.hpp"

#include <span>
#include <string>
#include <vector>

namespace testgen {

struct ExtraContentStats {
  int additional_classes = 0;
  int additional_interfaces = 0;
  int overriding_classes = 0;        // simple name collides with production
  int empty_placeholder_classes = 0;  // body holds nothing but comments

  ExtraContentStats& operator+=(const ExtraContentStats& o);
};

// One unit's generated suite after the repair loop, with the bookkeeping the
// metrics module needs: n_generated is frozen before any pruning, so
// surviving_passing + n_non_compiling + n_non_passing == n_generated.
struct TestSuiteArtifact {
  std::string unit_id;
  std::string test_class_name;
  std::vector<SourceFile> files;                // surviving files
  std::vector<TestVerdict> per_test_verdicts;   // one per generated test
  int n_generated = 0;
  int removed_non_compiling = 0;  // test methods pruned individually
  int removed_files = 0;
  int removed_tests_in_files = 0;  // generated tests lost with removed files
  ExtraContentStats extra_content;
  int repair_rounds_used = 0;
  bool aborted = false;
  std::string abort_reason;

  int n_non_compiling() const { return removed_non_compiling + removed_tests_in_files; }
  int n_non_passing() const;
  int surviving_passing() const;
};

// --- identity alignment ------------------------------------------------------

struct AlignOutcome {
  std::string source;
  bool fixable = true;  // false: not recoverable at the top level
};

// Rewrites the package header to the CUT's, renames the primary declared test
// class (and its self-references) to the expected name, and inserts the
// framework import when test markers are used without it. Idempotent.
AlignOutcome align_identity(const std::string& file_source,
                            const std::string& expected_test_class_name,
                            const std::string& expected_package, const LanguageSpec& lang);

// --- pruning -----------------------------------------------------------------

struct PruneStats {
  int removed_methods = 0;        // test methods removed individually
  int removed_helpers = 0;        // non-test members/types removed
  int removed_files = 0;
  int removed_tests_in_files = 0;
  std::vector<TestVerdict> not_compiled;  // one per removed test method
};

// Applies one round of the filtering rules: diagnostics attributed to a test
// method remove that method, diagnostics inside a helper declaration remove
// the declaration, import-level or unattributable diagnostics remove the
// whole file. `files` is edited in place.
PruneStats prune_non_compiling(std::vector<SourceFile>& files,
                               const std::vector<Diagnostic>& diagnostics,
                               const LanguageSpec& lang);

// Prune/recompile cycle, at most `max_rounds` prune passes; any file still
// failing afterwards is removed wholesale so the survivor always compiles.
PruneStats prune_until_clean(std::vector<SourceFile>& files, Toolchain& toolchain,
                             const Workspace& ws, const LanguageSpec& lang, int max_rounds = 3);

// --- classification ----------------------------------------------------------

struct FailureCounts {
  int n_generated = 0;
  int n_non_compiling = 0;
  int n_non_passing = 0;
};

// Buckets finalized verdicts for Eq. (1)/(2); each test lands in exactly one
// bucket (passed tests are the remainder).
FailureCounts classify_failures(std::span<const TestVerdict> verdicts);

// --- extra content -----------------------------------------------------------

// Counts non-test class and interface declarations in the artifact. The
// expected test class itself is never counted; everything else is additional,
// `overriding` when its simple name collides with a production type, and an
// empty placeholder when its body declares nothing.
ExtraContentStats detect_extra_content(const std::vector<SourceFile>& files,
                                       const std::vector<std::string>& expected_class_names,
                                       const ProjectModel& project, const LanguageSpec& lang);

// Counts test methods in a source file (tolerant parse; 0 if unparseable).
int count_test_methods(const std::string& source, const LanguageSpec& lang);

Json sanitizer_report_to_json(const TestSuiteArtifact& artifact);

}  // namespace testgen

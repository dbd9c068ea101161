#include "testgen/toolchain.hpp"

#include "support/fixtures.hpp"
#include "testgen/errors.hpp"
#include "testgen/subprocess.hpp"

#include <gtest/gtest.h>

#include <random>

namespace testgen {
namespace {

using testsupport::SimScriptBuilder;
using testsupport::TempDir;
using testsupport::TestMethodSpec;

const LanguageSpec& lang() { return language_spec("java"); }

SourceFile test_file(const std::string& name, const std::vector<TestMethodSpec>& tests,
                     const std::string& extra = "") {
  std::string class_name = name.substr(0, name.rfind('.'));
  return SourceFile{name, testsupport::render_test_class("", class_name, tests, extra)};
}

TEST(Simulator, CoverageGroundTruth) {
  // Project of 10 lines; the suite covers 6 of them.
  Json script = SimScriptBuilder()
                    .project_scope(10, 0, 0)
                    .cover("ATest.java::t1", {1, 2, 3}, {})
                    .cover("ATest.java::t2", {3, 4, 5, 6}, {})
                    .build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  std::vector<SourceFile> suite = {test_file("ATest.java", {{"t1"}, {"t2"}})};
  CoverageSnapshot cov = sim.coverage(ws, suite);
  EXPECT_EQ(cov.lines_total, 10);
  EXPECT_EQ(cov.lines_covered, 6);
}

TEST(Simulator, VerdictsFromMarkers) {
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());
  Workspace ws;
  std::vector<SourceFile> files = {
      test_file("ATest.java", {{"t1"}, {"t2"}, {"t3", /*fails=*/true}})};
  auto verdicts = sim.run_tests(ws, files);
  ASSERT_EQ(verdicts.size(), 3u);
  EXPECT_EQ(verdicts[0].status, VerdictStatus::Passed);
  EXPECT_EQ(verdicts[1].status, VerdictStatus::Passed);
  EXPECT_EQ(verdicts[2].status, VerdictStatus::Failed);
  EXPECT_FALSE(verdicts[2].failure_message.empty());
}

TEST(Simulator, ScriptedMutantKillMap) {
  // 20 mutants; the suite's union kills exactly 9 (oracle: hand union).
  Json script = SimScriptBuilder()
                    .project_scope(5, 0, 20)
                    .kills("ATest.java::t1", {0, 1, 2, 3})
                    .kills("ATest.java::t2", {2, 3, 4, 5, 6, 7, 8})
                    .build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  std::vector<SourceFile> suite = {test_file("ATest.java", {{"t1"}, {"t2"}})};
  MutationSnapshot mut = sim.mutation_score(ws, suite);
  EXPECT_EQ(mut.mutants_total, 20);
  EXPECT_EQ(mut.mutants_killed, 9);
}

TEST(Simulator, EmptySuiteHasNoVerdictsAndZeroCoverage) {
  Json script = SimScriptBuilder().project_scope(42, 7, 3).build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  EXPECT_TRUE(sim.run_tests(ws, {}).empty());
  CoverageSnapshot cov = sim.coverage(ws, {});
  EXPECT_EQ(cov.lines_covered, 0);
  EXPECT_EQ(cov.lines_total, 42);
  EXPECT_EQ(cov.branches_covered, 0);
  EXPECT_EQ(cov.branches_total, 7);
}

TEST(Simulator, CoverageMonotoneUnderSuiteUnion) {
  std::mt19937 rng(20250809);
  for (int trial = 0; trial < 25; ++trial) {
    SimScriptBuilder builder;
    builder.project_scope(50, 20, 0);
    std::vector<TestMethodSpec> all_tests;
    for (int t = 0; t < 8; ++t) {
      std::string name = "t" + std::to_string(t);
      std::vector<long> lines;
      std::vector<std::string> branches;
      for (int k = 0; k < 10; ++k) {
        lines.push_back(static_cast<long>(rng() % 50 + 1));
        branches.push_back("m:" + std::to_string(rng() % 20));
      }
      builder.cover("STest.java::" + name, lines, branches);
      all_tests.push_back({name});
    }
    SimulatedToolchain sim(builder.build(), lang());
    Workspace ws;

    std::size_t cut = 1 + rng() % 7;
    std::vector<TestMethodSpec> subset(all_tests.begin(), all_tests.begin() + cut);
    std::vector<SourceFile> small = {test_file("STest.java", subset)};
    std::vector<SourceFile> big = {test_file("STest.java", all_tests)};

    CoverageSnapshot a = sim.coverage(ws, small);
    CoverageSnapshot b = sim.coverage(ws, big);
    EXPECT_LE(a.lines_covered, b.lines_covered);
    EXPECT_LE(a.branches_covered, b.branches_covered);
  }
}

TEST(Simulator, AdapterCallsAreIdempotent) {
  Json script = SimScriptBuilder()
                    .project_scope(10, 4, 5)
                    .cover("ATest.java::t1", {1, 2}, {"m:0"})
                    .build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  std::vector<SourceFile> files = {test_file("ATest.java", {{"t1"}, {"bad", false, true}})};

  auto d1 = sim.compile(ws, files);
  auto d2 = sim.compile(ws, files);
  ASSERT_EQ(d1.size(), d2.size());
  for (std::size_t k = 0; k < d1.size(); ++k) {
    EXPECT_EQ(d1[k].message, d2[k].message);
    EXPECT_EQ(d1[k].file, d2[k].file);
  }
  EXPECT_EQ(sim.coverage(ws, files).lines_covered, sim.coverage(ws, files).lines_covered);
}

TEST(Simulator, MarkerDiagnosticsAreAttributed) {
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());
  Workspace ws;
  std::vector<SourceFile> files = {
      test_file("ATest.java", {{"good"}, {"broken", false, true}})};
  auto diags = sim.compile(ws, files);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagKind::CompileError);
  ASSERT_TRUE(diags[0].attributed_test.has_value());
  EXPECT_EQ(*diags[0].attributed_test, "broken");
  ASSERT_TRUE(diags[0].line.has_value());
}

TEST(Simulator, RefMarkerResolvesAgainstDeclaredAndProductionTypes) {
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());

  ProjectModel project;
  ContainerUnit prod;
  prod.qualified_name = "p.Known";
  prod.simple_name = "Known";
  prod.id = prod.qualified_name;
  project.containers.push_back(prod);
  Workspace ws;
  ws.project = &project;

  std::string helper = "    static class Helper {\n        int x;\n    }\n";
  std::vector<SourceFile> ok_files = {
      test_file("ATest.java", {{"t1", false, false, "Helper"}, {"t2", false, false, "Known"}},
                helper)};
  EXPECT_TRUE(sim.compile(ws, ok_files).empty());

  std::vector<SourceFile> bad_files = {
      test_file("ATest.java", {{"t1", false, false, "Ghost"}})};
  auto diags = sim.compile(ws, bad_files);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].message.find("Ghost"), std::string::npos);
}

TEST(Simulator, BadImportCondemnsFile) {
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());
  Workspace ws;
  SourceFile f = test_file("ATest.java", {{"t1"}});
  f.content = "/*BAD_IMPORT*/\n" + f.content;
  auto diags = sim.compile(ws, {f});
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagKind::ImportError);
  EXPECT_FALSE(diags[0].line.has_value());
}

TEST(Simulator, UnparseableFileFailsCompilation) {
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());
  Workspace ws;
  SourceFile f{"ATest.java", "public class ATest { void t() { if (x) {"};
  auto diags = sim.compile(ws, {f});
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagKind::CompileError);
}

TEST(Simulator, ExplicitCompileOutcomeOverridesMarkers) {
  Json diag = Json::array({Json{{"kind", "import_error"}, {"message", "scripted import failure"}}});
  Json script = SimScriptBuilder().project_scope(1, 0, 0).compile_outcome("ATest.java", diag).build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  auto diags = sim.compile(ws, {test_file("ATest.java", {{"clean"}})});
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagKind::ImportError);
  EXPECT_EQ(diags[0].file, "ATest.java");
}

TEST(Simulator, StrictModeDesyncsOnUnknownQueries) {
  Json script = SimScriptBuilder().project_scope(5, 0, 0).strict(true).build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  std::vector<SourceFile> files = {test_file("ATest.java", {{"t1"}})};
  EXPECT_THROW(sim.run_tests(ws, files), ToolchainDesync);
  EXPECT_THROW(sim.coverage(ws, files), ToolchainDesync);
}

TEST(Simulator, CoverageErrorScript) {
  Json script = SimScriptBuilder().project_scope(5, 0, 0).coverage_error(true).build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  EXPECT_THROW(sim.coverage(ws, {}), CoverageUnavailable);
}

TEST(Simulator, PerMethodScopes) {
  Json script = SimScriptBuilder()
                    .project_scope(20, 6, 0)
                    .method_scope("p.Foo#bar(int)", 4, {1, 2, 3})
                    .method_scope("p.Foo#baz()", 2, {4, 5})
                    .cover("ATest.java::t1", {1, 2}, {"p.Foo#bar(int):0", "p.Foo#bar(int):1"})
                    .build();
  SimulatedToolchain sim(script, lang());
  Workspace ws;
  CoverageSnapshot cov = sim.coverage(ws, {test_file("ATest.java", {{"t1"}})});
  EXPECT_EQ(cov.per_method_branches.at("p.Foo#bar(int)"), (std::pair<long, long>{2, 4}));
  EXPECT_EQ(cov.per_method_branches.at("p.Foo#baz()"), (std::pair<long, long>{0, 2}));
  EXPECT_EQ(cov.per_method_lines.at("p.Foo#bar(int)"), (std::pair<long, long>{2, 3}));
  EXPECT_EQ(cov.per_method_lines.at("p.Foo#baz()"), (std::pair<long, long>{0, 2}));
}

// --- subprocess + command toolchain ----------------------------------------------

TEST(Subprocess, CapturesOutputAndExitCode) {
  ProcessResult res = run_shell("echo out; echo err 1>&2; exit 3", "", std::chrono::seconds(10));
  EXPECT_EQ(res.exit_code, 3);
  EXPECT_EQ(res.stdout_text, "out\n");
  EXPECT_EQ(res.stderr_text, "err\n");
  EXPECT_FALSE(res.timed_out);
}

TEST(Subprocess, TimesOut) {
  ProcessResult res = run_shell("sleep 5", "", std::chrono::seconds(1));
  EXPECT_TRUE(res.timed_out);
}

TEST(CommandToolchain, ProtocolRoundTrip) {
  TempDir ws_dir;
  CommandToolchainConfig config;
  config.test_dir = "gen";
  // The shim asserts the materialized file exists, then emits protocol JSON.
  config.compile_command =
      "test -f gen/ATest.java && printf '{\"diagnostics\":[{\"file\":\"ATest.java\","
      "\"line\":3,\"kind\":\"compile_error\",\"message\":\"boom\","
      "\"attributed_test\":\"t1\"}]}'";
  config.test_command =
      "printf '{\"verdicts\":[{\"file\":\"ATest.java\",\"method\":\"t1\",\"status\":\"passed\"}]}'";
  config.coverage_command =
      "printf '{\"lines_total\":10,\"lines_covered\":4,\"branches_total\":2,"
      "\"branches_covered\":1,\"per_method_branches\":{\"k\":[1,2]}}'";
  config.mutation_command = "printf '{\"mutants_total\":5,\"mutants_killed\":2}'";
  auto toolchain = make_command_toolchain(config);

  Workspace ws;
  ws.root = ws_dir.str();
  std::vector<SourceFile> files = {test_file("ATest.java", {{"t1"}})};

  auto diags = toolchain->compile(ws, files);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].message, "boom");
  EXPECT_EQ(*diags[0].attributed_test, "t1");

  auto verdicts = toolchain->run_tests(ws, files);
  ASSERT_EQ(verdicts.size(), 1u);
  EXPECT_EQ(verdicts[0].status, VerdictStatus::Passed);

  CoverageSnapshot cov = toolchain->coverage(ws, files);
  EXPECT_EQ(cov.lines_covered, 4);
  EXPECT_EQ(cov.per_method_branches.at("k"), (std::pair<long, long>{1, 2}));

  MutationSnapshot mut = toolchain->mutation_score(ws, files);
  EXPECT_EQ(mut.mutants_killed, 2);
}

TEST(CommandToolchain, MissingBinaryIsEnvironmentError) {
  TempDir ws_dir;
  CommandToolchainConfig config;
  config.compile_command = "/definitely/not/a/binary";
  auto toolchain = make_command_toolchain(config);
  Workspace ws;
  ws.root = ws_dir.str();
  EXPECT_THROW(toolchain->compile(ws, {}), EnvironmentError);
}

TEST(CommandToolchain, TimeoutSurfacesAsToolTimeout) {
  TempDir ws_dir;
  CommandToolchainConfig config;
  config.compile_command = "sleep 5";
  config.compile_timeout_s = 1;
  auto toolchain = make_command_toolchain(config);
  Workspace ws;
  ws.root = ws_dir.str();
  EXPECT_THROW(toolchain->compile(ws, {}), ToolTimeout);
}

TEST(CommandToolchain, CoverageFailureIsCoverageUnavailable) {
  TempDir ws_dir;
  CommandToolchainConfig config;
  config.coverage_command = "echo 'not json'; exit 1";
  auto toolchain = make_command_toolchain(config);
  Workspace ws;
  ws.root = ws_dir.str();
  EXPECT_THROW(toolchain->coverage(ws, {}), CoverageUnavailable);
}

}  // namespace
}  // namespace testgen

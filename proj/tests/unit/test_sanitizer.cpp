#include "testgen/sanitizer.hpp"

#include "support/fixtures.hpp"
#include "testgen/errors.hpp"

#include <gtest/gtest.h>

#include <random>

namespace testgen {
namespace {

using testsupport::SimScriptBuilder;
using testsupport::TestMethodSpec;

const LanguageSpec& lang() { return language_spec("java"); }

ProjectModel tiny_project() {
  ProjectModel project;
  for (const char* name : {"Foo", "User", "Order"}) {
    ContainerUnit c;
    c.simple_name = name;
    c.qualified_name = std::string("prod.") + name;
    c.id = c.qualified_name;
    c.package_name = "prod";
    c.source_text = "class X {}";
    project.containers.push_back(std::move(c));
  }
  return project;
}

// --- align_identity ------------------------------------------------------------

TEST(AlignIdentity, RenamesDeclarationAndSelfReferences) {
  std::string source =
      "package prod;\n\n"
      "import org.junit.jupiter.api.Test;\n\n"
      "public class FoTest {\n"
      "    private FoTest self = new FoTest();\n"
      "    @Test\n"
      "    public void t1() { FoTest.helper(); }\n"
      "    static void helper() {}\n"
      "}\n";
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  ASSERT_TRUE(out.fixable);
  EXPECT_EQ(out.source.find("FoTest"), std::string::npos);
  EXPECT_NE(out.source.find("public class FooTest"), std::string::npos);
  EXPECT_NE(out.source.find("new FooTest()"), std::string::npos);
  EXPECT_NE(out.source.find("FooTest.helper()"), std::string::npos);
}

TEST(AlignIdentity, AlreadyAlignedIsByteIdentical) {
  std::string source =
      "package prod;\n\n"
      "import org.junit.jupiter.api.Test;\n\n"
      "public class FooTest {\n"
      "    @Test\n"
      "    public void t1() {}\n"
      "}\n";
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  ASSERT_TRUE(out.fixable);
  EXPECT_EQ(out.source, source);
}

TEST(AlignIdentity, RewritesWrongPackageHeaderOnly) {
  std::string source =
      "package wrong.place;\n\n"
      "import org.junit.jupiter.api.Test;\n\n"
      "public class FooTest {\n"
      "    @Test\n"
      "    public void t1() { int x = 1; }\n"
      "}\n";
  // Oracle: the expected output differs from the input only in the header.
  std::string expected = source;
  expected.replace(expected.find("package wrong.place;"), std::string("package wrong.place;").size(),
                   "package prod;");
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  ASSERT_TRUE(out.fixable);
  EXPECT_EQ(out.source, expected);
}

TEST(AlignIdentity, InsertsMissingPackageAndImport) {
  std::string source =
      "public class FooTest {\n"
      "    @Test\n"
      "    public void t1() {}\n"
      "}\n";
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  ASSERT_TRUE(out.fixable);
  EXPECT_EQ(out.source.rfind("package prod;", 0), 0u);
  EXPECT_NE(out.source.find(lang().framework_import), std::string::npos);
  // Package precedes the import.
  EXPECT_LT(out.source.find("package prod;"), out.source.find(lang().framework_import));
}

TEST(AlignIdentity, KeepsExistingFrameworkImport) {
  std::string source =
      "package prod;\n"
      "import org.junit.jupiter.api.Test;\n"
      "public class FooTest { @Test public void t() {} }\n";
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  EXPECT_EQ(out.source, source);
}

TEST(AlignIdentity, IdempotentOnVariedFixtures) {
  std::vector<std::string> fixtures = {
      "class FooTest { @Test void a() {} }\n",
      "package a.b;\nclass Wrong { @Test void a() {} }\n",
      "import java.util.*;\npublic class X { @Test public void t() { List<String> l; } }\n",
      "package prod;\npublic class FooTest { void plain() {} }\n",
  };
  for (const auto& source : fixtures) {
    AlignOutcome once = align_identity(source, "FooTest", "prod", lang());
    ASSERT_TRUE(once.fixable) << source;
    AlignOutcome twice = align_identity(once.source, "FooTest", "prod", lang());
    ASSERT_TRUE(twice.fixable) << source;
    EXPECT_EQ(once.source, twice.source) << source;
  }
}

TEST(AlignIdentity, UnbalancedSourceIsUnfixable) {
  EXPECT_FALSE(align_identity("public class A { void t() {", "ATest", "", lang()).fixable);
  EXPECT_FALSE(align_identity("no types here, only prose", "ATest", "", lang()).fixable);
}

TEST(AlignIdentity, PicksClassWithMostTestsAsPrimary) {
  std::string source =
      "package prod;\n"
      "import org.junit.jupiter.api.Test;\n"
      "class Helper { void h() {} }\n"
      "public class Actual {\n"
      "    @Test public void t1() {}\n"
      "    @Test public void t2() {}\n"
      "}\n";
  AlignOutcome out = align_identity(source, "FooTest", "prod", lang());
  ASSERT_TRUE(out.fixable);
  EXPECT_NE(out.source.find("public class FooTest"), std::string::npos);
  EXPECT_NE(out.source.find("class Helper"), std::string::npos);  // untouched
}

// --- prune_non_compiling ---------------------------------------------------------

TEST(Prune, RemovesAttributedMethodsKeepsRest) {
  std::vector<SourceFile> files = {SourceFile{
      "FooTest.java",
      testsupport::render_test_class("prod", "FooTest",
                                     {{"t1"}, {"t2"}, {"t3"}, {"t4"}, {"t5"}})}};
  std::vector<Diagnostic> diags = {
      Diagnostic{"FooTest.java", std::nullopt, std::nullopt, DiagKind::CompileError, "bad", "t2"},
      Diagnostic{"FooTest.java", std::nullopt, std::nullopt, DiagKind::CompileError, "bad", "t4"},
  };
  PruneStats stats = prune_non_compiling(files, diags, lang());
  EXPECT_EQ(stats.removed_methods, 2);
  EXPECT_EQ(stats.removed_files, 0);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(count_test_methods(files[0].content, lang()), 3);
  EXPECT_EQ(files[0].content.find("void t2("), std::string::npos);
  EXPECT_NE(files[0].content.find("void t3("), std::string::npos);
  ASSERT_EQ(stats.not_compiled.size(), 2u);
  EXPECT_EQ(stats.not_compiled[0].status, VerdictStatus::NotCompiled);
}

TEST(Prune, ImportErrorRemovesWholeFile) {
  std::vector<SourceFile> files = {
      SourceFile{"FooTest.java",
                 testsupport::render_test_class("prod", "FooTest", {{"t1"}, {"t2"}})},
      SourceFile{"BarTest.java", testsupport::render_test_class("prod", "BarTest", {{"ok"}})}};
  std::vector<Diagnostic> diags = {Diagnostic{
      "FooTest.java", std::nullopt, std::nullopt, DiagKind::ImportError, "bad import", {}}};
  PruneStats stats = prune_non_compiling(files, diags, lang());
  EXPECT_EQ(stats.removed_files, 1);
  EXPECT_EQ(stats.removed_tests_in_files, 2);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].name, "BarTest.java");
}

TEST(Prune, HelperClassRemovedTestsKept) {
  std::string helper =
      "    static class Helper {\n"
      "        int broken() { return unknown; }\n"
      "    }\n";
  std::string source = testsupport::render_test_class("prod", "FooTest", {{"t1"}, {"t2"}}, helper);
  // Locate the helper's line for the diagnostic.
  int helper_line = 1;
  for (std::size_t k = 0; k < source.find("class Helper"); ++k) {
    if (source[k] == '\n') ++helper_line;
  }
  std::vector<SourceFile> files = {SourceFile{"FooTest.java", source}};
  std::vector<Diagnostic> diags = {Diagnostic{
      "FooTest.java", helper_line, 12, DiagKind::CompileError, "cannot find symbol", {}}};
  PruneStats stats = prune_non_compiling(files, diags, lang());
  EXPECT_EQ(stats.removed_files, 0);
  EXPECT_EQ(stats.removed_methods, 0);
  EXPECT_EQ(stats.removed_helpers, 1);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].content.find("class Helper"), std::string::npos);
  EXPECT_EQ(count_test_methods(files[0].content, lang()), 2);
}

TEST(Prune, UnattributableDiagnosticCondemnsFile) {
  std::vector<SourceFile> files = {SourceFile{
      "FooTest.java", testsupport::render_test_class("prod", "FooTest", {{"t1"}})}};
  std::vector<Diagnostic> diags = {
      Diagnostic{"FooTest.java", std::nullopt, std::nullopt, DiagKind::CompileError, "???", {}}};
  PruneStats stats = prune_non_compiling(files, diags, lang());
  EXPECT_EQ(stats.removed_files, 1);
  EXPECT_TRUE(files.empty());
}

TEST(Prune, NeverRemovesUndiagnosedMethods) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng() % 6);
    std::vector<TestMethodSpec> tests;
    for (int k = 0; k < n; ++k) tests.push_back({"t" + std::to_string(k)});
    std::vector<SourceFile> files = {
        SourceFile{"FooTest.java", testsupport::render_test_class("prod", "FooTest", tests)}};
    std::set<int> doomed;
    std::vector<Diagnostic> diags;
    for (int k = 0; k < n; ++k) {
      if (rng() % 2 == 0) {
        doomed.insert(k);
        diags.push_back(Diagnostic{"FooTest.java", std::nullopt, std::nullopt,
                                   DiagKind::CompileError, "bad", "t" + std::to_string(k)});
      }
    }
    prune_non_compiling(files, diags, lang());
    if (doomed.size() == static_cast<std::size_t>(n)) {
      if (!files.empty()) {
        EXPECT_EQ(count_test_methods(files[0].content, lang()), 0);
      }
      continue;
    }
    ASSERT_EQ(files.size(), 1u);
    for (int k = 0; k < n; ++k) {
      bool present = files[0].content.find("void t" + std::to_string(k) + "(") != std::string::npos;
      EXPECT_EQ(present, doomed.count(k) == 0) << "trial " << trial << " method " << k;
    }
  }
}

TEST(Prune, CascadeConvergesWithinThreeRounds) {
  // t1 references Helper; Helper is broken. Round 1 removes Helper, round 2
  // removes the now-orphaned t1, round 3 is clean.
  std::string helper =
      "    static class Helper {\n"
      "        /*BAD*/ int broken() { return 0; }\n"
      "    }\n";
  std::vector<SourceFile> files = {SourceFile{
      "FooTest.java",
      testsupport::render_test_class("prod", "FooTest",
                                     {{"t1", false, false, "Helper"}, {"t2"}}, helper)}};
  SimulatedToolchain sim(SimScriptBuilder().project_scope(1, 0, 0).build(), lang());
  Workspace ws;
  PruneStats stats = prune_until_clean(files, sim, ws, lang(), 3);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_TRUE(sim.compile(ws, files).empty());
  EXPECT_EQ(count_test_methods(files[0].content, lang()), 1);
  EXPECT_EQ(stats.removed_methods, 1);
  EXPECT_EQ(stats.removed_helpers, 1);
}

// --- classify_failures ------------------------------------------------------------

TEST(Classify, LargeScaleCounts) {
  std::vector<TestVerdict> verdicts;
  for (int k = 0; k < 367; ++k) verdicts.push_back({"f", "nc", VerdictStatus::NotCompiled, "m"});
  for (int k = 0; k < 1232; ++k) verdicts.push_back({"f", "np", VerdictStatus::Failed, "m"});
  for (int k = 0; k < 3232 - 367 - 1232; ++k) verdicts.push_back({"f", "ok", VerdictStatus::Passed, ""});
  FailureCounts counts = classify_failures(verdicts);
  EXPECT_EQ(counts.n_generated, 3232);
  EXPECT_EQ(counts.n_non_compiling, 367);
  EXPECT_EQ(counts.n_non_passing, 1232);
}

TEST(Classify, AllPassing) {
  std::vector<TestVerdict> verdicts(17, TestVerdict{"f", "m", VerdictStatus::Passed, ""});
  FailureCounts counts = classify_failures(verdicts);
  EXPECT_EQ(counts.n_generated, 17);
  EXPECT_EQ(counts.n_non_compiling, 0);
  EXPECT_EQ(counts.n_non_passing, 0);
}

TEST(Classify, MatchesBruteForceRecountOnRandomLists) {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TestVerdict> verdicts;
    int n = static_cast<int>(rng() % 40);
    int expect_nc = 0, expect_np = 0, expect_pass = 0;
    for (int k = 0; k < n; ++k) {
      switch (rng() % 3) {
        case 0:
          verdicts.push_back({"f", "m", VerdictStatus::Passed, ""});
          ++expect_pass;
          break;
        case 1:
          verdicts.push_back({"f", "m", VerdictStatus::Failed, "x"});
          ++expect_np;
          break;
        default:
          verdicts.push_back({"f", "m", VerdictStatus::NotCompiled, "x"});
          ++expect_nc;
          break;
      }
    }
    FailureCounts counts = classify_failures(verdicts);
    EXPECT_EQ(counts.n_generated, n);
    EXPECT_EQ(counts.n_non_compiling, expect_nc);
    EXPECT_EQ(counts.n_non_passing, expect_np);
    // Partition: passing remainder accounts for everything else.
    EXPECT_EQ(counts.n_generated - counts.n_non_compiling - counts.n_non_passing, expect_pass);
  }
}

// --- detect_extra_content -----------------------------------------------------------

TEST(ExtraContent, EmptyPlaceholderClassCountedAsAdditionalAndEmpty) {
  // A placeholder helper whose body is nothing but a comment.
  std::string body =
      "    /** Helper classes for testing */\n"
      "    private static class TestClass {\n"
      "        // Simple test class\n"
      "    }\n";
  std::vector<SourceFile> files = {
      SourceFile{"FooTest.java", testsupport::render_test_class("prod", "FooTest", {{"t1"}}, body)}};
  ExtraContentStats stats = detect_extra_content(files, {"FooTest"}, tiny_project(), lang());
  EXPECT_EQ(stats.additional_classes, 1);
  EXPECT_EQ(stats.empty_placeholder_classes, 1);
  EXPECT_EQ(stats.additional_interfaces, 0);
  EXPECT_EQ(stats.overriding_classes, 0);
}

TEST(ExtraContent, OverridingHelperDetected) {
  // A helper that redefines the production type 'User'.
  std::string body =
      "    // Test class for JSON deserialization\n"
      "    static class User {\n"
      "        private String name;\n"
      "        private int age;\n"
      "        @Override\n"
      "        public boolean equals(Object o) {\n"
      "            if (this == o) return true;\n"
      "            if (o == null || getClass() != o.getClass()) return false;\n"
      "            User user = (User) o;\n"
      "            return age == user.age && (name != null ? name.equals(user.name) : user.name == null);\n"
      "        }\n"
      "        @Override\n"
      "        public int hashCode() {\n"
      "            int result = name != null ? name.hashCode() : 0;\n"
      "            result = 31 * result + age;\n"
      "            return result;\n"
      "        }\n"
      "    }\n";
  std::vector<SourceFile> files = {
      SourceFile{"FooTest.java", testsupport::render_test_class("prod", "FooTest", {{"t1"}}, body)}};
  ExtraContentStats stats = detect_extra_content(files, {"FooTest"}, tiny_project(), lang());
  EXPECT_EQ(stats.additional_classes, 1);
  EXPECT_EQ(stats.overriding_classes, 1);
  EXPECT_EQ(stats.empty_placeholder_classes, 0);
}

TEST(ExtraContent, OnlyTestMethodsMeansAllZeros) {
  std::vector<SourceFile> files = {SourceFile{
      "FooTest.java", testsupport::render_test_class("prod", "FooTest", {{"t1"}, {"t2"}})}};
  ExtraContentStats stats = detect_extra_content(files, {"FooTest"}, tiny_project(), lang());
  EXPECT_EQ(stats.additional_classes, 0);
  EXPECT_EQ(stats.additional_interfaces, 0);
  EXPECT_EQ(stats.overriding_classes, 0);
  EXPECT_EQ(stats.empty_placeholder_classes, 0);
}

TEST(ExtraContent, InterfacesCountedSeparately) {
  std::string body = "    interface Callback { void done(); }\n    interface Empty {}\n";
  std::vector<SourceFile> files = {
      SourceFile{"FooTest.java", testsupport::render_test_class("prod", "FooTest", {{"t1"}}, body)}};
  ExtraContentStats stats = detect_extra_content(files, {"FooTest"}, tiny_project(), lang());
  EXPECT_EQ(stats.additional_interfaces, 2);
  EXPECT_EQ(stats.additional_classes, 0);
}

TEST(ExtraContent, NeverCountsExpectedTestClass) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TestMethodSpec> tests;
    for (int k = 0; k < static_cast<int>(rng() % 4); ++k) tests.push_back({"t" + std::to_string(k)});
    std::string body;
    int extra = static_cast<int>(rng() % 3);
    for (int k = 0; k < extra; ++k) {
      body += "    static class Extra" + std::to_string(k) + " { int v; }\n";
    }
    std::vector<SourceFile> files = {
        SourceFile{"FooTest.java", testsupport::render_test_class("prod", "FooTest", tests, body)}};
    ExtraContentStats stats = detect_extra_content(files, {"FooTest"}, tiny_project(), lang());
    EXPECT_EQ(stats.additional_classes, extra);
  }
}

// --- artifact invariants -------------------------------------------------------------

TEST(Artifact, PartitionInvariantHolds) {
  TestSuiteArtifact artifact;
  artifact.n_generated = 10;
  artifact.removed_non_compiling = 2;
  artifact.removed_tests_in_files = 1;
  for (int k = 0; k < 3; ++k) {
    artifact.per_test_verdicts.push_back({"f", "nc" + std::to_string(k), VerdictStatus::NotCompiled, "d"});
  }
  for (int k = 0; k < 4; ++k) {
    artifact.per_test_verdicts.push_back({"f", "p" + std::to_string(k), VerdictStatus::Passed, ""});
  }
  for (int k = 0; k < 3; ++k) {
    artifact.per_test_verdicts.push_back({"f", "f" + std::to_string(k), VerdictStatus::Failed, "m"});
  }
  EXPECT_EQ(artifact.n_non_compiling(), 3);
  EXPECT_EQ(artifact.n_non_passing(), 3);
  EXPECT_EQ(artifact.surviving_passing(), 4);
  EXPECT_EQ(artifact.surviving_passing() + artifact.n_non_compiling() + artifact.n_non_passing(),
            artifact.n_generated);
}

}  // namespace
}  // namespace testgen

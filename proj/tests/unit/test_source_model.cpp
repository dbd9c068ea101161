#include "testgen/source_model.hpp"

#include "support/fixtures.hpp"
#include "testgen/errors.hpp"
#include "testgen/java_units.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace testgen {
namespace {

using testsupport::TempDir;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

TEST(SourceModel, SingleClassWithConstructorAndMethod) {
  TempDir dir;
  write_file(dir.path() / "Foo.java",
             "public class Foo {\n"
             "    public Foo() {}\n"
             "    public int bar(int x) { return x; }\n"
             "}\n");

  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_EQ(project.containers.size(), 1u);
  const ContainerUnit& foo = project.containers[0];
  EXPECT_EQ(foo.qualified_name, "Foo");
  EXPECT_TRUE(foo.has_constructor);
  EXPECT_TRUE(container_has_constructor(foo));
  ASSERT_EQ(foo.methods.size(), 1u);
  EXPECT_EQ(foo.methods[0].name, "bar");
  EXPECT_EQ(foo.methods[0].signature, "bar(int)");
}

TEST(SourceModel, ImplicitConstructorDoesNotCount) {
  TempDir dir;
  write_file(dir.path() / "Foo.java", "public class Foo { public int bar() { return 1; } }\n");
  ProjectModel project = discover_units(dir.str(), "java");
  EXPECT_FALSE(project.containers[0].has_constructor);
}

TEST(SourceModel, ThreeOverloadedConstructorsCount) {
  TempDir dir;
  write_file(dir.path() / "Foo.java",
             "public class Foo {\n"
             "    Foo() {}\n"
             "    Foo(int a) {}\n"
             "    Foo(String a) {}\n"
             "}\n");
  ProjectModel project = discover_units(dir.str(), "java");
  EXPECT_TRUE(project.containers[0].has_constructor);
  // Constructors are not methods under test.
  EXPECT_EQ(project.containers[0].methods.size(), 0u);
}

TEST(SourceModel, OverloadsYieldDistinctSignatures) {
  // Oracle: the fixture declares exactly these two members, hand-enumerated.
  TempDir dir;
  write_file(dir.path() / "Foo.java",
             "public class Foo {\n"
             "    public void bar(int x) {}\n"
             "    public void bar(String s) {}\n"
             "}\n");
  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_EQ(project.containers.size(), 1u);
  const auto& methods = project.containers[0].methods;
  ASSERT_EQ(methods.size(), 2u);
  EXPECT_EQ(methods[0].name, "bar");
  EXPECT_EQ(methods[1].name, "bar");
  EXPECT_EQ(methods[0].signature, "bar(int)");
  EXPECT_EQ(methods[1].signature, "bar(String)");
  EXPECT_NE(methods[0].signature, methods[1].signature);
}

TEST(SourceModel, MissingRootIsInputError) {
  EXPECT_THROW(discover_units("/nonexistent/path/for/testgen", "java"), InputError);
}

TEST(SourceModel, EmptyProjectError) {
  TempDir dir;
  write_file(dir.path() / "README.md", "no sources here\n");
  EXPECT_THROW(discover_units(dir.str(), "java"), EmptyProjectError);
}

TEST(SourceModel, UnknownAdapterIsConfigError) {
  EXPECT_THROW(language_spec("cobol"), ConfigError);
}

TEST(SourceModel, NestedTypesAreFlattened) {
  TempDir dir;
  write_file(dir.path() / "Outer.java",
             "package p;\n"
             "public class Outer {\n"
             "    public void top() {}\n"
             "    public static class Inner {\n"
             "        public Inner() {}\n"
             "        public void inside() {}\n"
             "    }\n"
             "    interface Callback { void onDone(); }\n"
             "}\n");
  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_EQ(project.containers.size(), 3u);
  EXPECT_EQ(project.containers[0].qualified_name, "p.Outer");
  EXPECT_EQ(project.containers[1].qualified_name, "p.Outer.Callback");
  EXPECT_EQ(project.containers[2].qualified_name, "p.Outer.Inner");
  EXPECT_TRUE(project.containers[2].has_constructor);
  EXPECT_TRUE(project.containers[1].is_interface_like);
  ASSERT_EQ(project.containers[0].methods.size(), 1u);  // Inner's methods not on Outer
  EXPECT_EQ(project.containers[0].methods[0].name, "top");
}

TEST(SourceModel, ParsesGenericsEnumsRecordsAndTextBlocks) {
  TempDir dir;
  write_file(dir.path() / "Mixed.java",
             "package p;\n"
             "import java.util.*;\n"
             "public class Mixed<T extends Comparable<T>> {\n"
             "    private String s = \"\"\"\n    text { } \"quoted\" block\n    \"\"\";\n"
             "    private Runnable r = () -> { if (s != null) { s.length(); } };\n"
             "    public <U> Map<String, List<U>> transform(Map<String, U> input, U... extra) {\n"
             "        return new HashMap<>();\n"
             "    }\n"
             "    public int pick(boolean flag) { return flag ? 1 : 0; }\n"
             "}\n");
  write_file(dir.path() / "Color.java",
             "package p;\n"
             "public enum Color {\n"
             "    RED(1) { @Override public int weight() { return 2; } },\n"
             "    BLUE(2);\n"
             "    private final int code;\n"
             "    Color(int code) { this.code = code; }\n"
             "    public int weight() { return code; }\n"
             "}\n");
  write_file(dir.path() / "Point.java",
             "package p;\n"
             "public record Point(int x, int y) {\n"
             "    public Point {\n"
             "        if (x < 0 || y < 0) throw new IllegalArgumentException();\n"
             "    }\n"
             "    public int manhattan() { return Math.abs(x) + Math.abs(y); }\n"
             "}\n");

  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_EQ(project.containers.size(), 3u);

  const ContainerUnit* mixed = project.find_container("p.Mixed");
  ASSERT_NE(mixed, nullptr);
  ASSERT_EQ(mixed->methods.size(), 2u);
  EXPECT_EQ(mixed->methods[0].signature, "transform(Map<String,U>,U...)");
  EXPECT_EQ(mixed->methods[1].signature, "pick(boolean)");
  EXPECT_EQ(mixed->methods[1].branch_count, 2);  // one ternary

  const ContainerUnit* color = project.find_container("p.Color");
  ASSERT_NE(color, nullptr);
  EXPECT_TRUE(color->has_constructor);
  ASSERT_EQ(color->methods.size(), 1u);
  EXPECT_EQ(color->methods[0].name, "weight");

  const ContainerUnit* point = project.find_container("p.Point");
  ASSERT_NE(point, nullptr);
  EXPECT_TRUE(point->has_constructor);  // compact canonical constructor
  ASSERT_EQ(point->methods.size(), 1u);
  EXPECT_EQ(point->methods[0].name, "manhattan");
}

TEST(SourceModel, BranchCountsFromSyntax) {
  TempDir dir;
  write_file(dir.path() / "B.java",
             "public class B {\n"
             "    public int f(int x) {\n"
             "        if (x > 0 && x < 10) { return 1; }\n"   // if, &&
             "        for (int i = 0; i < x; i++) { x--; }\n"  // for
             "        while (x > 0) { x--; }\n"                // while
             "        switch (x) { case 1: return 2; case 2: return 3; default: return 0; }\n"
             "    }\n"
             "    public int g() { return 0; }\n"
             "}\n");
  ProjectModel project = discover_units(dir.str(), "java");
  const auto& methods = project.containers[0].methods;
  // decision points: if + && + for + while + 2 case = 6 -> 12 branch outcomes
  EXPECT_EQ(methods[0].branch_count, 12);
  EXPECT_EQ(methods[1].branch_count, 0);
}

TEST(SourceModel, DeterministicSerializationAcrossRuns) {
  TempDir dir;
  testsupport::write_synthetic_corpus(dir.path(), 12, 7);
  ProjectModel first = discover_units(dir.str(), "java");
  ProjectModel second = discover_units(dir.str(), "java");
  EXPECT_EQ(units_to_json(first).dump(2), units_to_json(second).dump(2));
}

TEST(SourceModel, MethodCountMatchesContainerSum) {
  TempDir dir;
  auto specs = testsupport::write_synthetic_corpus(dir.path(), 9, 3);
  std::size_t expected = 0;
  for (const auto& s : specs) expected += s.methods.size();
  ProjectModel project = discover_units(dir.str(), "java");
  EXPECT_EQ(project.method_count(), expected);
}

TEST(SourceModel, SpansReparseAsMethodDeclarations) {
  TempDir dir;
  testsupport::write_synthetic_corpus(dir.path(), 6, 11);
  write_file(dir.path() / "extra" / "Tricky.java",
             "package corpus.extra;\n"
             "public class Tricky {\n"
             "    @Deprecated\n"
             "    public java.util.List<String> names(int n) throws Exception {\n"
             "        return java.util.List.of(\"a\", \"b\");\n"
             "    }\n"
             "    public abstract static class Base { public void noop() {} }\n"
             "}\n");
  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_FALSE(project.containers.empty());

  int checked = 0;
  for (const auto& container : project.containers) {
    for (const auto& method : container.methods) {
      ASSERT_LE(method.span_end, container.source_text.size());
      std::string slice =
          container.source_text.substr(method.span_begin, method.span_end - method.span_begin);
      std::string shim = "class Shim {\n" + slice + "\n}\n";
      java::CompilationUnit cu = java::parse_compilation_unit(shim);
      ASSERT_EQ(cu.types.size(), 1u) << slice;
      ASSERT_EQ(cu.types[0].members.size(), 1u) << slice;
      EXPECT_EQ(cu.types[0].members[0].signature, method.signature);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(SourceModel, TableOneScaleCorpus) {
  // Six repositories totalling 393 containers and 3657 methods.
  const std::vector<std::pair<int, int>> repos = {
      {46, 481}, {43, 538}, {75, 541}, {53, 656}, {78, 400}, {98, 1041}};
  TempDir dir;
  int total_containers = 0;
  for (std::size_t r = 0; r < repos.size(); ++r) {
    auto [cuts, muts] = repos[r];
    total_containers += cuts;
    std::vector<testsupport::ContainerSpec> specs;
    int remaining = muts;
    for (int c = 0; c < cuts; ++c) {
      testsupport::ContainerSpec spec;
      spec.package = "repo" + std::to_string(r) + ".pkg" + std::to_string(c % 5);
      spec.name = "Cut" + std::to_string(c);
      spec.explicit_constructor = (c % 3 == 0);
      int classes_left = cuts - c;
      int take = remaining / classes_left;
      if (c + 1 == cuts) take = remaining;
      for (int m = 0; m < take; ++m) {
        spec.methods.push_back({"m" + std::to_string(m), m % 2 ? "int" : "", m % 3});
      }
      remaining -= take;
      specs.push_back(std::move(spec));
    }
    testsupport::write_project(dir.path() / ("repo" + std::to_string(r)), specs);
  }

  ProjectModel project = discover_units(dir.str(), "java");
  EXPECT_EQ(project.containers.size(), 393u);
  EXPECT_EQ(static_cast<int>(project.containers.size()), total_containers);
  EXPECT_EQ(project.method_count(), 3657u);
}

TEST(SourceModel, ContainersSortedAndUnique) {
  TempDir dir;
  write_file(dir.path() / "b" / "Zed.java", "package b; public class Zed { void z() {} }\n");
  write_file(dir.path() / "a" / "Alpha.java", "package a; public class Alpha { void a() {} }\n");
  ProjectModel project = discover_units(dir.str(), "java");
  ASSERT_EQ(project.containers.size(), 2u);
  EXPECT_EQ(project.containers[0].qualified_name, "a.Alpha");
  EXPECT_EQ(project.containers[1].qualified_name, "b.Zed");
  EXPECT_LT(project.containers[0].qualified_name, project.containers[1].qualified_name);
}

TEST(SourceModel, MalformedSourceIsParseError) {
  TempDir dir;
  write_file(dir.path() / "Broken.java", "public class Broken { public void f() { if (x) {\n");
  EXPECT_THROW(discover_units(dir.str(), "java"), ParseError);
}

}  // namespace
}  // namespace testgen

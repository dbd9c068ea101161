#pragma once

#include "testgen/jsonio.hpp"
#include "testgen/source_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testgen::testsupport {

// Self-deleting scratch directory for project fixtures and run outputs.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

private:
  std::filesystem::path path_;
};

// --- synthetic project fixtures ---------------------------------------------

struct MethodSpec {
  std::string name;
  std::string param_type;  // "" for no parameter
  int branches = 0;        // emitted as chained if statements
};

struct ContainerSpec {
  std::string package;
  std::string name;
  std::vector<MethodSpec> methods;
  bool explicit_constructor = false;
};

// Renders one compilable Java source file for the container.
std::string render_container_source(const ContainerSpec& spec);

// Writes each container under root/<package dirs>/<Name>.java.
void write_project(const std::filesystem::path& root, const std::vector<ContainerSpec>& specs);

// Deterministic corpus: `containers` classes, cycling 3..7 methods each, a
// constructor on every other class. Returns the specs that were written.
std::vector<ContainerSpec> write_synthetic_corpus(const std::filesystem::path& root,
                                                  int containers, unsigned seed);

// --- generated-test fixtures ------------------------------------------------

struct TestMethodSpec {
  std::string name;
  bool fails = false;        // /*FAILS*/ marker
  bool bad_compile = false;  // /*BAD*/ marker
  std::string ref;           // /*REF:X*/ marker when non-empty

  TestMethodSpec() = default;
  TestMethodSpec(std::string name_, bool fails_ = false, bool bad_compile_ = false,
                 std::string ref_ = "")
      : name(std::move(name_)), fails(fails_), bad_compile(bad_compile_), ref(std::move(ref_)) {}
};

// A JUnit-style test class the scripted backend can return; fenced = wrapped
// in a markdown code fence like a model reply.
std::string render_test_class(const std::string& package, const std::string& class_name,
                              const std::vector<TestMethodSpec>& tests,
                              const std::string& extra_body = "");
std::string fenced(const std::string& code);

// --- simulator script builder -------------------------------------------------

class SimScriptBuilder {
public:
  SimScriptBuilder& project_scope(long lines_total, long branches_total, long mutants_total);
  SimScriptBuilder& method_scope(const std::string& key, long branches, std::vector<long> lines);
  SimScriptBuilder& verdict(const std::string& test_id, bool passed,
                            const std::string& message = "");
  SimScriptBuilder& cover(const std::string& test_id, std::vector<long> lines,
                          std::vector<std::string> branches);
  SimScriptBuilder& kills(const std::string& test_id, std::vector<long> mutants);
  SimScriptBuilder& compile_outcome(const std::string& file, Json diagnostics);
  SimScriptBuilder& strict(bool value);
  SimScriptBuilder& coverage_error(bool value);
  Json build() const { return script_; }

private:
  Json script_ = Json::object();
};

}  // namespace testgen::testsupport

#include "support/fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace testgen::testsupport {

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("testgen-fixture-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string render_container_source(const ContainerSpec& spec) {
  std::ostringstream out;
  if (!spec.package.empty()) out << "package " << spec.package << ";\n\n";
  out << "public class " << spec.name << " {\n";
  out << "    private int state;\n\n";
  if (spec.explicit_constructor) {
    out << "    public " << spec.name << "(int state) {\n"
        << "        this.state = state;\n"
        << "    }\n\n";
  }
  for (const auto& m : spec.methods) {
    out << "    public int " << m.name << "(";
    if (!m.param_type.empty()) out << m.param_type << " input";
    out << ") {\n";
    out << "        int result = state;\n";
    for (int b = 0; b < m.branches; ++b) {
      out << "        if (result > " << b << ") {\n"
          << "            result = result - " << (b + 1) << ";\n"
          << "        }\n";
    }
    out << "        return result;\n    }\n\n";
  }
  out << "}\n";
  return out.str();
}

void write_project(const fs::path& root, const std::vector<ContainerSpec>& specs) {
  for (const auto& spec : specs) {
    fs::path dir = root;
    std::string package_path = spec.package;
    for (auto& c : package_path) {
      if (c == '.') c = '/';
    }
    if (!package_path.empty()) dir /= package_path;
    fs::create_directories(dir);
    std::ofstream out(dir / (spec.name + ".java"), std::ios::trunc);
    out << render_container_source(spec);
  }
}

std::vector<ContainerSpec> write_synthetic_corpus(const fs::path& root, int containers,
                                                  unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> method_count(3, 7);
  std::uniform_int_distribution<int> branch_count(0, 3);
  std::vector<ContainerSpec> specs;
  for (int k = 0; k < containers; ++k) {
    ContainerSpec spec;
    spec.package = "corpus.p" + std::to_string(k % 4);
    spec.name = "Unit" + std::to_string(k);
    spec.explicit_constructor = (k % 2 == 0);
    int n = method_count(rng);
    for (int m = 0; m < n; ++m) {
      MethodSpec ms;
      ms.name = "op" + std::to_string(m);
      ms.param_type = (m % 2 == 0) ? "int" : "";
      ms.branches = branch_count(rng);
      spec.methods.push_back(std::move(ms));
    }
    specs.push_back(std::move(spec));
  }
  write_project(root, specs);
  return specs;
}

std::string render_test_class(const std::string& package, const std::string& class_name,
                              const std::vector<TestMethodSpec>& tests,
                              const std::string& extra_body) {
  std::ostringstream out;
  if (!package.empty()) out << "package " << package << ";\n\n";
  out << "import org.junit.jupiter.api.Test;\n"
      << "import static org.junit.jupiter.api.Assertions.*;\n\n"
      << "public class " << class_name << " {\n";
  for (const auto& t : tests) {
    out << "    @Test\n    public void " << t.name << "() {\n";
    if (t.bad_compile) out << "        /*BAD*/\n";
    if (t.fails) out << "        /*FAILS*/\n";
    if (!t.ref.empty()) out << "        /*REF:" << t.ref << "*/\n";
    out << "        assertTrue(true);\n    }\n\n";
  }
  if (!extra_body.empty()) out << extra_body << "\n";
  out << "}\n";
  return out.str();
}

std::string fenced(const std::string& code) { return "```java\n" + code + "```\n"; }

SimScriptBuilder& SimScriptBuilder::project_scope(long lines_total, long branches_total,
                                                  long mutants_total) {
  script_["project"]["lines_total"] = lines_total;
  script_["project"]["branches_total"] = branches_total;
  script_["project"]["mutants_total"] = mutants_total;
  return *this;
}

SimScriptBuilder& SimScriptBuilder::method_scope(const std::string& key, long branches,
                                                 std::vector<long> lines) {
  Json scope;
  scope["branches"] = branches;
  scope["lines"] = lines;
  script_["project"]["methods"][key] = std::move(scope);
  return *this;
}

SimScriptBuilder& SimScriptBuilder::verdict(const std::string& test_id, bool passed,
                                            const std::string& message) {
  if (passed) {
    script_["test_verdicts"][test_id] = "passed";
  } else if (message.empty()) {
    script_["test_verdicts"][test_id] = "failed";
  } else {
    script_["test_verdicts"][test_id] = Json{{"status", "failed"}, {"message", message}};
  }
  return *this;
}

SimScriptBuilder& SimScriptBuilder::cover(const std::string& test_id, std::vector<long> lines,
                                          std::vector<std::string> branches) {
  Json entry;
  entry["lines"] = lines;
  entry["branches"] = branches;
  script_["coverage_tables"][test_id] = std::move(entry);
  return *this;
}

SimScriptBuilder& SimScriptBuilder::kills(const std::string& test_id, std::vector<long> mutants) {
  script_["mutant_kill_map"][test_id] = mutants;
  return *this;
}

SimScriptBuilder& SimScriptBuilder::compile_outcome(const std::string& file, Json diagnostics) {
  script_["compile_outcomes"][file] = std::move(diagnostics);
  return *this;
}

SimScriptBuilder& SimScriptBuilder::strict(bool value) {
  script_["strict"] = value;
  return *this;
}

SimScriptBuilder& SimScriptBuilder::coverage_error(bool value) {
  script_["coverage_error"] = value;
  return *this;
}

}  // namespace testgen::testsupport

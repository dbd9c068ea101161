#include "testgen/source_model.hpp"

#include "testgen/errors.hpp"
#include "testgen/java_units.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace testgen {

const LanguageSpec& language_spec(const std::string& id) {
  static const LanguageSpec java{
      "java",
      {".java"},
      "Java",
      "Junit5",
      {"Test", "ParameterizedTest", "RepeatedTest", "TestFactory"},
      "import org.junit.jupiter.api.*;",
      "org.junit.jupiter.api",
      ".java",
  };
  if (id == "java") return java;
  throw ConfigError("unknown language adapter: " + id);
}

const ContainerUnit* ProjectModel::find_container(const std::string& id) const {
  auto it = std::lower_bound(containers.begin(), containers.end(), id,
                             [](const ContainerUnit& c, const std::string& key) {
                               return c.qualified_name < key;
                             });
  if (it != containers.end() && it->qualified_name == id) return &*it;
  return nullptr;
}

std::size_t ProjectModel::method_count() const {
  std::size_t n = 0;
  for (const auto& c : containers) n += c.methods.size();
  return n;
}

std::set<std::string> ProjectModel::production_simple_names() const {
  std::set<std::string> names;
  for (const auto& c : containers) names.insert(c.simple_name);
  return names;
}

bool container_has_constructor(const ContainerUnit& container) {
  return container.has_constructor;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read source file: " + p.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void flatten_type(const java::TypeInfo& type, std::string_view file_source,
                  const std::string& package, const std::string& rel_path,
                  std::vector<ContainerUnit>& out) {
  ContainerUnit c;
  c.simple_name = type.name;
  c.package_name = package;
  c.qualified_name =
      package.empty() ? type.qualified_suffix : package + "." + type.qualified_suffix;
  c.id = c.qualified_name;
  c.source_text = std::string(file_source.substr(type.begin, type.end - type.begin));
  c.source_path = rel_path;
  c.has_constructor = type.has_explicit_constructor;
  c.is_abstract = type.is_abstract;
  c.is_interface_like =
      type.kind == java::TypeKind::Interface || type.kind == java::TypeKind::Annotation;

  for (const auto& m : type.members) {
    if (m.is_constructor) continue;
    MethodUnit mu;
    mu.container_id = c.id;
    mu.name = m.name;
    mu.signature = m.signature;
    mu.span_begin = m.begin - type.begin;
    mu.span_end = m.end - type.begin;
    mu.branch_count = m.branch_count;
    c.methods.push_back(std::move(mu));
  }
  out.push_back(std::move(c));

  for (const auto& nested : type.nested) {
    flatten_type(nested, file_source, package, rel_path, out);
  }
}

}  // namespace

ProjectModel discover_units(const std::string& root_path, const std::string& language_id) {
  const LanguageSpec& lang = language_spec(language_id);

  fs::path root(root_path);
  if (!fs::exists(root)) throw InputError("project root does not exist: " + root_path);

  std::vector<fs::path> files;
  if (fs::is_regular_file(root)) {
    files.push_back(root);
    root = root.parent_path();
  } else {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      if (std::find(lang.extensions.begin(), lang.extensions.end(), ext) !=
          lang.extensions.end()) {
        files.push_back(entry.path());
      }
    }
  }
  if (files.empty()) {
    throw EmptyProjectError("no " + lang.id + " sources under: " + root_path);
  }
  std::sort(files.begin(), files.end());

  ProjectModel project;
  project.root_path = root_path;
  project.language_id = language_id;

  for (const auto& file : files) {
    std::string source = read_file(file);
    java::ParseOptions opts;
    opts.test_markers = lang.test_markers;
    java::CompilationUnit cu;
    try {
      cu = java::parse_compilation_unit(source, opts);
    } catch (const ParseError& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
    std::string rel = fs::relative(file, root).generic_string();
    for (const auto& type : cu.types) {
      flatten_type(type, source, cu.package, rel, project.containers);
    }
  }

  std::sort(project.containers.begin(), project.containers.end(),
            [](const ContainerUnit& a, const ContainerUnit& b) {
              return a.qualified_name < b.qualified_name;
            });
  for (std::size_t k = 1; k < project.containers.size(); ++k) {
    if (project.containers[k].qualified_name == project.containers[k - 1].qualified_name) {
      throw InputError("duplicate container: " + project.containers[k].qualified_name);
    }
  }
  return project;
}

Json units_to_json(const ProjectModel& project) {
  Json doc;
  doc["root_path"] = project.root_path;
  doc["language"] = project.language_id;
  doc["container_count"] = project.containers.size();
  doc["method_count"] = project.method_count();
  Json containers = Json::array();
  for (const auto& c : project.containers) {
    Json jc;
    jc["qualified_name"] = c.qualified_name;
    jc["source_path"] = c.source_path;
    jc["has_constructor"] = c.has_constructor;
    jc["abstract"] = c.is_abstract;
    jc["interface"] = c.is_interface_like;
    Json methods = Json::array();
    for (const auto& m : c.methods) {
      Json jm;
      jm["name"] = m.name;
      jm["signature"] = m.signature;
      jm["branch_count"] = m.branch_count;
      methods.push_back(std::move(jm));
    }
    jc["methods"] = std::move(methods);
    containers.push_back(std::move(jc));
  }
  doc["containers"] = std::move(containers);
  return doc;
}

}  // namespace testgen

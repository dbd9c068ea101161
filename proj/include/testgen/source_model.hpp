#pragma once

#include "testgen/jsonio.hpp"

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace testgen {

// Per-ecosystem knobs the pipeline needs; parsing itself lives behind
// discover_units. Only "java" ships today.
struct LanguageSpec {
  std::string id;
  std::vector<std::string> extensions;
  std::string language_label;    // appears in prompts, e.g. "Java"
  std::string framework_label;   // appears in prompts, e.g. "Junit5"
  std::vector<std::string> test_markers;  // annotation simple names
  std::string framework_import;  // inserted when markers are used unimported
  std::string framework_import_prefix;
  std::string file_suffix;       // for generated test files
};

const LanguageSpec& language_spec(const std::string& id);

struct MethodUnit {
  std::string container_id;
  std::string name;
  std::string signature;
  std::size_t span_begin = 0;  // offsets into the container's source_text
  std::size_t span_end = 0;
  int branch_count = 0;
};

struct ContainerUnit {
  std::string id;  // equals qualified_name
  std::string qualified_name;
  std::string simple_name;
  std::string package_name;
  std::string source_text;
  std::string source_path;  // relative to the project root
  std::vector<MethodUnit> methods;  // source order, constructors excluded
  bool has_constructor = false;
  bool is_abstract = false;
  bool is_interface_like = false;  // interface or annotation type
};

struct ProjectModel {
  std::string root_path;
  std::string language_id;
  std::vector<ContainerUnit> containers;  // sorted by qualified_name

  const ContainerUnit* find_container(const std::string& id) const;
  std::size_t method_count() const;
  // Simple names of every production type, for overriding-helper detection.
  std::set<std::string> production_simple_names() const;
};

// Walks root_path for sources the adapter recognizes and extracts every
// container and method. Nested types are flattened into their own
// containers. Ordering is deterministic: containers lexicographic by
// qualified name, methods by source position.
ProjectModel discover_units(const std::string& root_path, const std::string& language_id);

bool container_has_constructor(const ContainerUnit& container);

Json units_to_json(const ProjectModel& project);

}  // namespace testgen

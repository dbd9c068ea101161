#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace testgen::java {

enum class TypeKind { Class, Interface, Enum, Record, Annotation };

// A method or constructor declaration. Spans are byte offsets into the
// parsed source; [begin, end) covers the whole declaration including its
// annotations and modifiers so a slice re-parses on its own.
struct MemberInfo {
  std::string name;
  std::string signature;  // name(paramType,paramType,...)
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t body_begin = 0;  // 0/0 for abstract and native members
  std::size_t body_end = 0;
  bool is_constructor = false;
  bool is_test_method = false;
  int branch_count = 0;  // decision points x2 outcomes
  int line = 1;
};

struct TypeInfo {
  TypeKind kind = TypeKind::Class;
  std::string name;
  std::string qualified_suffix;  // Outer or Outer.Inner, package not included
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t body_begin = 0;
  std::size_t body_end = 0;
  bool is_abstract = false;
  bool has_explicit_constructor = false;
  bool body_has_members = false;  // false => nothing but comments inside
  std::vector<MemberInfo> members;  // methods and constructors, source order
  std::vector<TypeInfo> nested;
  int line = 1;
};

struct ImportInfo {
  std::string path;  // as written, e.g. org.junit.jupiter.api.Test or foo.*
  bool is_static = false;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct CompilationUnit {
  std::string package;  // empty for the default package
  std::size_t package_begin = 0;
  std::size_t package_end = 0;
  std::vector<ImportInfo> imports;
  std::vector<TypeInfo> types;
  bool recovered_garbage = false;  // tolerant mode skipped unparseable tokens
};

struct ParseOptions {
  // Skip junk between declarations instead of failing. Unbalanced braces
  // still throw; LLM output that is truncated mid-class is unfixable.
  bool tolerant = false;
  // Annotation simple names that mark a method as a test.
  std::vector<std::string> test_markers;
};

// Throws ParseError when the source cannot be structured (tolerant mode only
// throws on unbalanced braces at type level).
CompilationUnit parse_compilation_unit(std::string_view source, const ParseOptions& opts = {});

// Walks a parsed tree depth-first, parents before children.
void visit_types(const std::vector<TypeInfo>& types,
                 const std::function<void(const TypeInfo&)>& fn);

}  // namespace testgen::java

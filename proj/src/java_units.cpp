#include "testgen/java_units.hpp"

#include "testgen/errors.hpp"
#include "testgen/lexer.hpp"

#include <algorithm>
#include <unordered_set>

namespace testgen::java {

namespace {

const std::unordered_set<std::string_view> kModifiers = {
    "public",   "private", "protected", "static",       "final",
    "abstract", "sealed",  "strictfp",  "native",       "synchronized",
    "transient", "volatile", "default",
};

bool is_type_keyword(std::string_view t) {
  return t == "class" || t == "interface" || t == "enum" || t == "record";
}

struct MemberScanError {
  std::string message;
  int line;
  bool fatal = false;  // hit EOF: not recoverable even in tolerant mode
};

class Parser {
public:
  Parser(std::string_view src, const ParseOptions& opts)
      : src_(src), opts_(opts), toks_(lex(src)) {}

  CompilationUnit run() {
    CompilationUnit unit;
    parse_package(unit);
    parse_imports(unit);
    while (!at_end()) {
      if (cur().kind == TokKind::Punct && cur().text == ";") {
        ++i_;
        continue;
      }
      std::size_t mark = i_;
      try {
        TypeInfo type = parse_type_decl("");
        unit.types.push_back(std::move(type));
      } catch (const MemberScanError& e) {
        if (!opts_.tolerant || e.fatal) {
          throw ParseError("line " + std::to_string(e.line) + ": " + e.message);
        }
        unit.recovered_garbage = true;
        i_ = mark + 1;
        skip_to_top_level_boundary();
      }
    }
    return unit;
  }

private:
  std::string_view src_;
  const ParseOptions& opts_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;

  bool at_end() const { return i_ >= toks_.size(); }
  const Token& cur() const { return toks_[i_]; }
  const Token& tok(std::size_t k) const { return toks_[k]; }
  int line_here() const { return at_end() ? (toks_.empty() ? 1 : toks_.back().line) : cur().line; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MemberScanError{msg, line_here(), at_end()};
  }

  bool is_punct(std::string_view p) const {
    return !at_end() && cur().kind == TokKind::Punct && cur().text == p;
  }
  bool is_ident(std::string_view t) const {
    return !at_end() && cur().kind == TokKind::Ident && cur().text == t;
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    ++i_;
  }

  // --- small skippers -------------------------------------------------

  void skip_balanced(std::string_view open, std::string_view close) {
    if (!is_punct(open)) fail("expected '" + std::string(open) + "'");
    int depth = 0;
    while (!at_end()) {
      if (cur().kind == TokKind::Punct) {
        if (cur().text == open) ++depth;
        else if (cur().text == close) {
          --depth;
          if (depth == 0) {
            ++i_;
            return;
          }
        }
      }
      ++i_;
    }
    fail("unbalanced '" + std::string(open) + "'");
  }

  void skip_angles() {
    // Only called where '<' must open type arguments, never as less-than.
    int depth = 0;
    while (!at_end()) {
      if (cur().kind == TokKind::Punct) {
        std::string_view t = cur().text;
        if (t == "<") ++depth;
        else if (t == ">") {
          --depth;
          if (depth == 0) {
            ++i_;
            return;
          }
        } else if (t == ";" || t == "{") {
          fail("malformed type arguments");
        }
      }
      ++i_;
    }
    fail("unbalanced '<'");
  }

  // Reads one annotation (cursor on '@'), returning its simple name.
  std::string read_annotation() {
    ++i_;  // '@'
    if (at_end() || cur().kind != TokKind::Ident) fail("expected annotation name");
    std::string simple(cur().text);
    ++i_;
    while (is_punct(".")) {  // fully qualified annotation
      ++i_;
      if (at_end() || cur().kind != TokKind::Ident) fail("expected annotation name segment");
      simple = std::string(cur().text);
      ++i_;
    }
    if (is_punct("(")) skip_balanced("(", ")");
    return simple;
  }

  std::string read_qualified_name() {
    if (at_end() || cur().kind != TokKind::Ident) fail("expected name");
    std::string q(cur().text);
    ++i_;
    while (is_punct(".")) {
      ++i_;
      if (is_punct("*")) {
        q += ".*";
        ++i_;
        break;
      }
      if (at_end() || cur().kind != TokKind::Ident) fail("expected name segment");
      q += ".";
      q += cur().text;
      ++i_;
    }
    return q;
  }

  void parse_package(CompilationUnit& unit) {
    // Package annotations (package-info.java) sit before the keyword; skip
    // them only when a package declaration actually follows.
    std::size_t mark = i_;
    while (is_punct("@")) {
      ++i_;
      if (is_ident("interface")) break;
      --i_;
      read_annotation();
    }
    if (!is_ident("package")) {
      i_ = mark;
      return;
    }
    std::size_t begin = cur().begin;
    ++i_;
    unit.package = read_qualified_name();
    if (!is_punct(";")) fail("expected ';' after package");
    unit.package_begin = begin;
    unit.package_end = cur().end;
    ++i_;
  }

  void parse_imports(CompilationUnit& unit) {
    while (is_ident("import")) {
      ImportInfo imp;
      imp.begin = cur().begin;
      ++i_;
      if (is_ident("static")) {
        imp.is_static = true;
        ++i_;
      }
      imp.path = read_qualified_name();
      if (!is_punct(";")) fail("expected ';' after import");
      imp.end = cur().end;
      ++i_;
      unit.imports.push_back(std::move(imp));
    }
  }

  struct Prefix {
    std::size_t begin;
    int line;
    bool is_abstract = false;
    std::vector<std::string> annotations;
  };

  // Annotations and modifiers shared by type and member declarations.
  Prefix read_decl_prefix() {
    if (at_end()) fail("unexpected end of file");
    Prefix p{cur().begin, cur().line, false, {}};
    while (!at_end()) {
      if (is_punct("@")) {
        std::size_t mark = i_;
        ++i_;
        if (is_ident("interface")) {  // start of '@interface Foo'
          i_ = mark;
          break;
        }
        i_ = mark;
        p.annotations.push_back(read_annotation());
        continue;
      }
      if (cur().kind == TokKind::Ident) {
        if (cur().text == "abstract") {
          p.is_abstract = true;
          ++i_;
          continue;
        }
        if (kModifiers.count(cur().text)) {
          ++i_;
          continue;
        }
        if (cur().text == "non" && i_ + 2 < toks_.size() && tok(i_ + 1).text == "-" &&
            tok(i_ + 2).text == "sealed") {
          i_ += 3;
          continue;
        }
      }
      break;
    }
    return p;
  }

  bool at_type_keyword() const {
    if (at_end()) return false;
    if (cur().kind == TokKind::Ident && is_type_keyword(cur().text)) return true;
    if (cur().kind == TokKind::Punct && cur().text == "@" && i_ + 1 < toks_.size() &&
        tok(i_ + 1).text == "interface") {
      return true;
    }
    return false;
  }

  TypeInfo parse_type_decl(const std::string& outer_suffix) {
    Prefix prefix = read_decl_prefix();
    return parse_type_decl_after_prefix(prefix, outer_suffix);
  }

  TypeInfo parse_type_decl_after_prefix(const Prefix& prefix, const std::string& outer_suffix) {
    TypeInfo type;
    type.begin = prefix.begin;
    type.line = prefix.line;
    type.is_abstract = prefix.is_abstract;

    if (is_punct("@")) {
      ++i_;
      if (!is_ident("interface")) fail("expected 'interface' after '@'");
      type.kind = TypeKind::Annotation;
      ++i_;
    } else if (is_ident("class")) {
      type.kind = TypeKind::Class;
      ++i_;
    } else if (is_ident("interface")) {
      type.kind = TypeKind::Interface;
      ++i_;
    } else if (is_ident("enum")) {
      type.kind = TypeKind::Enum;
      ++i_;
    } else if (is_ident("record")) {
      type.kind = TypeKind::Record;
      ++i_;
    } else {
      fail("expected a type declaration");
    }

    if (at_end() || cur().kind != TokKind::Ident) fail("expected type name");
    type.name = std::string(cur().text);
    type.qualified_suffix = outer_suffix.empty() ? type.name : outer_suffix + "." + type.name;
    ++i_;

    if (is_punct("<")) skip_angles();
    if (type.kind == TypeKind::Record && is_punct("(")) {
      std::size_t header_open = i_;
      skip_balanced("(", ")");
      // Record components are state declarations: such a record is not an
      // empty placeholder even with an empty body.
      if (i_ > header_open + 2) type.body_has_members = true;
    }

    // extends / implements / permits clauses up to the body.
    while (!at_end() && !is_punct("{")) {
      if (is_punct("<")) {
        skip_angles();
        continue;
      }
      if (is_punct(";")) fail("type declaration without a body");
      ++i_;
    }
    if (at_end()) fail("missing type body");

    type.body_begin = cur().begin;
    ++i_;  // '{'

    if (type.kind == TypeKind::Enum) {
      parse_enum_constants(type);
    }
    parse_members(type);
    return type;
  }

  void parse_enum_constants(TypeInfo& type) {
    // Constants run until ';' (members follow) or the closing '}'.
    while (!at_end()) {
      if (is_punct("}")) return;  // caller consumes
      if (is_punct(";")) {
        ++i_;
        return;
      }
      type.body_has_members = true;
      while (is_punct("@")) read_annotation();
      if (at_end() || cur().kind != TokKind::Ident) fail("expected enum constant");
      ++i_;
      if (is_punct("(")) skip_balanced("(", ")");
      if (is_punct("{")) skip_balanced("{", "}");  // constant class body
      if (is_punct(",")) {
        ++i_;
        continue;
      }
    }
    fail("unterminated enum body");
  }

  void parse_members(TypeInfo& type) {
    while (true) {
      if (at_end()) fail("unterminated type body");
      if (is_punct("}")) {
        type.body_end = cur().end;
        type.end = cur().end;
        ++i_;
        return;
      }
      type.body_has_members = true;
      if (is_punct(";")) {
        ++i_;
        continue;
      }
      if (is_punct("{")) {  // instance initializer
        skip_balanced("{", "}");
        continue;
      }
      std::size_t mark = i_;
      try {
        parse_member(type);
      } catch (const MemberScanError& e) {
        if (!opts_.tolerant || e.fatal) throw;
        i_ = mark;
        skip_bad_member();
      }
    }
  }

  void parse_member(TypeInfo& type) {
    Prefix prefix = read_decl_prefix();

    if (is_punct("{")) {  // 'static { ... }'
      skip_balanced("{", "}");
      return;
    }
    if (is_punct(";")) {
      ++i_;
      return;
    }
    if (at_type_keyword()) {
      TypeInfo nested = parse_type_decl_after_prefix(prefix, type.qualified_suffix);
      type.nested.push_back(std::move(nested));
      return;
    }
    parse_field_or_method(type, prefix);
  }

  void parse_field_or_method(TypeInfo& type, const Prefix& prefix) {
    // Scan the declaration header. In header position '<' always opens type
    // arguments and '=' always starts a field initializer.
    std::ptrdiff_t name_idx = -1;
    int idents_before_name = 0;
    while (true) {
      if (at_end()) fail("unterminated member");
      if (cur().kind == TokKind::Punct) {
        std::string_view t = cur().text;
        if (t == "<") {
          skip_angles();
          continue;
        }
        if (t == "=") {
          skip_field_initializer();
          return;
        }
        if (t == ";") {  // field without initializer
          ++i_;
          return;
        }
        if (t == "(") {
          if (i_ == 0 || tok(i_ - 1).kind != TokKind::Ident) fail("malformed member header");
          name_idx = static_cast<std::ptrdiff_t>(i_) - 1;
          break;
        }
        if (t == "{") {
          // Compact record constructor: 'public Foo { ... }'.
          if (i_ > 0 && tok(i_ - 1).kind == TokKind::Ident && tok(i_ - 1).text == type.name &&
              idents_before_name == 1) {
            finish_constructor_like(type, prefix, std::string(type.name),
                                    std::string(type.name) + "()", true);
            return;
          }
          fail("unexpected '{' in member header");
        }
        ++i_;
        continue;
      }
      if (cur().kind == TokKind::Ident) ++idents_before_name;
      ++i_;
    }

    MemberInfo m;
    m.begin = prefix.begin;
    m.line = prefix.line;
    m.name = std::string(tok(static_cast<std::size_t>(name_idx)).text);
    m.is_constructor = (idents_before_name == 1 && m.name == type.name);
    m.signature = m.name + "(" + parse_parameter_types() + ")";

    // throws clause and, for annotation members, a default value.
    while (!at_end() && !is_punct("{") && !is_punct(";")) {
      if (is_punct("<")) {
        skip_angles();
        continue;
      }
      if (is_punct("(")) {
        skip_balanced("(", ")");
        continue;
      }
      ++i_;
    }
    if (at_end()) fail("unterminated member");

    if (is_punct(";")) {
      m.end = cur().end;
      ++i_;
    } else {
      m.body_begin = cur().begin;
      std::size_t body_start_tok = i_;
      skip_balanced("{", "}");
      m.body_end = tok(i_ - 1).end;
      m.end = m.body_end;
      m.branch_count = count_branches(body_start_tok, i_);
    }

    m.is_test_method = false;
    if (!m.is_constructor) {
      for (const auto& a : prefix.annotations) {
        if (std::find(opts_.test_markers.begin(), opts_.test_markers.end(), a) !=
            opts_.test_markers.end()) {
          m.is_test_method = true;
          break;
        }
      }
    }
    if (m.is_constructor) type.has_explicit_constructor = true;
    type.members.push_back(std::move(m));
  }

  void finish_constructor_like(TypeInfo& type, const Prefix& prefix, std::string name,
                               std::string signature, bool has_body) {
    MemberInfo m;
    m.begin = prefix.begin;
    m.line = prefix.line;
    m.name = std::move(name);
    m.signature = std::move(signature);
    m.is_constructor = true;
    if (has_body) {
      m.body_begin = cur().begin;
      std::size_t body_start_tok = i_;
      skip_balanced("{", "}");
      m.body_end = tok(i_ - 1).end;
      m.end = m.body_end;
      m.branch_count = count_branches(body_start_tok, i_);
    }
    type.has_explicit_constructor = true;
    type.members.push_back(std::move(m));
  }

  // Cursor on '(' of the parameter list; returns "T1,T2,..." normalized.
  std::string parse_parameter_types() {
    std::size_t open = i_;
    skip_balanced("(", ")");
    std::size_t close = i_ - 1;

    std::vector<std::vector<std::size_t>> params;
    std::vector<std::size_t> cur_param;
    int paren = 0, angle = 0, bracket = 0, brace = 0;
    for (std::size_t k = open + 1; k < close; ++k) {
      const Token& t = tok(k);
      if (t.kind == TokKind::Punct) {
        if (t.text == "(") ++paren;
        else if (t.text == ")") --paren;
        else if (t.text == "<") ++angle;
        else if (t.text == ">") --angle;
        else if (t.text == "[") ++bracket;
        else if (t.text == "]") --bracket;
        else if (t.text == "{") ++brace;
        else if (t.text == "}") --brace;
        else if (t.text == "," && paren == 0 && angle == 0 && bracket == 0 && brace == 0) {
          params.push_back(cur_param);
          cur_param.clear();
          continue;
        }
      }
      cur_param.push_back(k);
    }
    if (!cur_param.empty()) params.push_back(cur_param);

    std::string out;
    for (std::size_t p = 0; p < params.size(); ++p) {
      if (p) out += ",";
      out += parameter_type_text(params[p]);
    }
    return out;
  }

  std::string parameter_type_text(const std::vector<std::size_t>& idxs) {
    // Drop parameter annotations and 'final', then split off the name:
    // the last identifier, plus C-style brackets that may trail it.
    std::vector<std::size_t> toks;
    for (std::size_t k = 0; k < idxs.size(); ++k) {
      const Token& t = tok(idxs[k]);
      if (t.kind == TokKind::Punct && t.text == "@") {
        // annotation: name (dotted) and optional args
        ++k;
        while (k + 1 < idxs.size() && tok(idxs[k + 1]).text == ".") k += 2;
        if (k + 1 < idxs.size() && tok(idxs[k + 1]).text == "(") {
          int d = 0;
          ++k;
          for (; k < idxs.size(); ++k) {
            if (tok(idxs[k]).text == "(") ++d;
            else if (tok(idxs[k]).text == ")" && --d == 0) break;
          }
        }
        continue;
      }
      if (t.kind == TokKind::Ident && t.text == "final") continue;
      toks.push_back(idxs[k]);
    }
    if (toks.empty()) return "";

    std::ptrdiff_t name_pos = -1;
    for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(toks.size()) - 1; k >= 0; --k) {
      if (tok(toks[static_cast<std::size_t>(k)]).kind == TokKind::Ident) {
        name_pos = k;
        break;
      }
    }
    std::string out;
    std::string suffix;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(toks.size()); ++k) {
      const Token& t = tok(toks[static_cast<std::size_t>(k)]);
      if (k == name_pos) continue;
      if (k > name_pos && name_pos >= 0) {
        suffix += std::string(t.text);  // trailing [] of C-style arrays
        continue;
      }
      if (!out.empty() && t.kind == TokKind::Ident &&
          tok(toks[static_cast<std::size_t>(k - 1)]).kind == TokKind::Ident) {
        out += " ";
      }
      out += std::string(t.text);
    }
    return out + suffix;
  }

  void skip_field_initializer() {
    // Cursor on '='; fields may hold lambdas, anonymous classes, arrays.
    ++i_;
    int paren = 0, brace = 0, bracket = 0;
    while (!at_end()) {
      if (cur().kind == TokKind::Punct) {
        std::string_view t = cur().text;
        if (t == "(") ++paren;
        else if (t == ")") --paren;
        else if (t == "{") ++brace;
        else if (t == "}") --brace;
        else if (t == "[") ++bracket;
        else if (t == "]") --bracket;
        else if (t == ";" && paren == 0 && brace == 0 && bracket == 0) {
          ++i_;
          return;
        }
      }
      ++i_;
    }
    fail("unterminated field initializer");
  }

  int count_branches(std::size_t from_tok, std::size_t to_tok) {
    int points = 0;
    for (std::size_t k = from_tok; k < to_tok; ++k) {
      const Token& t = tok(k);
      if (t.kind == TokKind::Ident) {
        if (t.text == "if" || t.text == "for" || t.text == "while" || t.text == "case") {
          ++points;
        }
        continue;
      }
      if (t.kind != TokKind::Punct) continue;
      if (t.text == "&&" || t.text == "||") {
        ++points;
        continue;
      }
      if (t.text == "?") {
        // Skip generic wildcards: '?' right before '>', ',', 'extends', 'super'.
        if (k + 1 < to_tok) {
          const Token& nx = tok(k + 1);
          if (nx.text == ">" || nx.text == "," || nx.text == "extends" || nx.text == "super") {
            continue;
          }
        }
        ++points;
      }
    }
    return points * 2;
  }

  void skip_bad_member() {
    // Recovery: drop tokens until a ';' or '}' at member level.
    int depth = 0;
    while (!at_end()) {
      if (cur().kind == TokKind::Punct) {
        std::string_view t = cur().text;
        if (t == "{") ++depth;
        else if (t == "}") {
          if (depth == 0) return;  // let parse_members close the type
          --depth;
        } else if (t == ";" && depth == 0) {
          ++i_;
          return;
        }
      }
      ++i_;
    }
  }

  void skip_to_top_level_boundary() {
    int depth = 0;
    while (!at_end()) {
      if (cur().kind == TokKind::Punct) {
        std::string_view t = cur().text;
        if (t == "{") ++depth;
        else if (t == "}") {
          --depth;
          if (depth <= 0) {
            ++i_;
            return;
          }
        }
      }
      ++i_;
    }
  }
};

}  // namespace

CompilationUnit parse_compilation_unit(std::string_view source, const ParseOptions& opts) {
  try {
    return Parser(source, opts).run();
  } catch (const MemberScanError& e) {
    throw ParseError("line " + std::to_string(e.line) + ": " + e.message);
  }
}

void visit_types(const std::vector<TypeInfo>& types,
                 const std::function<void(const TypeInfo&)>& fn) {
  for (const auto& t : types) {
    fn(t);
    visit_types(t.nested, fn);
  }
}

}  // namespace testgen::java

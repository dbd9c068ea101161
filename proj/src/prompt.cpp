#include "testgen/prompt.hpp"

#include "testgen/errors.hpp"

#include <algorithm>

namespace testgen {

namespace {

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

void require_placeholders(const std::string& label, const std::string& tpl,
                          const std::vector<std::string>& required,
                          const std::vector<std::string>& allowed) {
  if (tpl.empty()) {
    throw ConfigError("prompt template '" + label + "' is empty");
  }
  for (const auto& ph : required) {
    if (!contains(tpl, ph)) {
      throw ConfigError("prompt template '" + label + "' is missing placeholder " + ph);
    }
  }
  static const std::vector<std::string> kAll = {"{class_content}", "{method}", "{test_class}",
                                                "{errors}", "{language}", "{framework}"};
  for (const auto& ph : kAll) {
    if (!contains(tpl, ph)) continue;
    if (std::find(allowed.begin(), allowed.end(), ph) == allowed.end()) {
      throw ConfigError("prompt template '" + label + "' must not use placeholder " + ph);
    }
  }
}

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults(const LanguageSpec& lang) {
  PromptTemplateSet set;
  set.class_template =
      "The following class is missing unit tests. Please generate all tests needed to achieve "
      "100% code coverage using {language} and {framework}. Return only the code\n\n"
      "{class_content}";
  set.method_template =
      "The following class is missing unit tests for method {method}. Please generate all tests "
      "needed to achieve 100% code coverage for method {method}, using {language} and "
      "{framework}.\nThe name of the generated test class must be {test_class}. Return only the "
      "code\n\n{class_content}";
  set.constructor_template =
      "The following class is missing unit tests for its constructors. Please generate all tests "
      "needed to cover the constructors of the class, using {language} and {framework}.\nThe "
      "name of the generated test class must be {test_class}. Return only the code\n\n"
      "{class_content}";
  set.repair_template =
      "The tests you generated produced the following errors. Fix the tests and return only the "
      "corrected code:\n{errors}";
  set.test_framework_label = lang.framework_label;
  return set;
}

void validate_templates(const PromptTemplateSet& set) {
  require_placeholders("class", set.class_template, {"{class_content}"},
                       {"{class_content}", "{language}", "{framework}"});
  require_placeholders("method", set.method_template, {"{class_content}", "{method}", "{test_class}"},
                       {"{class_content}", "{method}", "{test_class}", "{language}", "{framework}"});
  require_placeholders("constructor", set.constructor_template, {"{class_content}", "{test_class}"},
                       {"{class_content}", "{test_class}", "{language}", "{framework}"});
  require_placeholders("repair", set.repair_template, {"{errors}"}, {"{errors}"});
}

PromptFactory::PromptFactory(PromptTemplateSet set, const LanguageSpec& lang, int diagnostic_cap)
    : set_(std::move(set)), language_label_(lang.language_label), diagnostic_cap_(diagnostic_cap) {
  if (set_.test_framework_label.empty()) set_.test_framework_label = lang.framework_label;
  validate_templates(set_);
}

std::string PromptFactory::build_class_prompt(const ContainerUnit& container) const {
  if (container.source_text.empty()) {
    throw InputError("container has no source text: " + container.qualified_name);
  }
  std::string out = replace_all(set_.class_template, "{language}", language_label_);
  out = replace_all(out, "{framework}", set_.test_framework_label);
  return replace_all(out, "{class_content}", container.source_text);
}

std::string PromptFactory::build_method_prompt(const ContainerUnit& container,
                                               const std::string& method_name,
                                               const std::string& test_class_name) const {
  const bool constructor_pass = method_name == kConstructorTarget;
  if (constructor_pass) {
    if (!container.has_constructor) {
      throw InputError("container declares no constructor: " + container.qualified_name);
    }
  } else {
    bool known = std::any_of(container.methods.begin(), container.methods.end(),
                             [&](const MethodUnit& m) { return m.name == method_name; });
    if (!known) {
      throw InputError("unknown method '" + method_name + "' on " + container.qualified_name);
    }
  }

  std::string out = constructor_pass ? set_.constructor_template : set_.method_template;
  out = replace_all(out, "{language}", language_label_);
  out = replace_all(out, "{framework}", set_.test_framework_label);
  if (!constructor_pass) out = replace_all(out, "{method}", method_name);
  out = replace_all(out, "{test_class}", test_class_name);
  return replace_all(out, "{class_content}", container.source_text);
}

std::string PromptFactory::build_repair_prompt(const std::string& diagnostics) const {
  if (diagnostics.empty()) {
    throw InputError("repair prompt requires non-empty diagnostics");
  }
  std::string capped = truncate_diagnostics(diagnostics, static_cast<std::size_t>(diagnostic_cap_));
  return replace_all(set_.repair_template, "{errors}", capped);
}

std::string truncate_diagnostics(const std::string& text, std::size_t cap) {
  if (cap == 0 || text.size() <= cap) return text;
  std::size_t head = cap * 3 / 4;
  std::size_t tail = cap - head;
  std::size_t omitted = text.size() - cap;
  return text.substr(0, head) + "\n... [" + std::to_string(omitted) +
         " characters of tool output omitted] ...\n" + text.substr(text.size() - tail);
}

std::string render_name_pattern(const std::string& pattern, const std::string& class_name,
                                const std::string& method_name) {
  std::string out = replace_all(pattern, "{class}", class_name);
  return replace_all(out, "{method}", method_name);
}

}  // namespace testgen

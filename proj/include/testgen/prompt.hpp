#pragma once

#include "testgen/source_model.hpp"

#include <string>

namespace testgen {

// Sentinel method name selecting the constructor-targeting prompt.
inline constexpr const char* kConstructorTarget = "<init>";

struct PromptTemplateSet {
  std::string class_template;
  std::string method_template;
  std::string constructor_template;
  std::string repair_template;
  std::string test_framework_label;  // substituted for {framework}

  // Shipped defaults for the given adapter.
  static PromptTemplateSet defaults(const LanguageSpec& lang);
};

// Validates that each template carries all of its required placeholders and
// none that belong to other templates. Throws ConfigError.
void validate_templates(const PromptTemplateSet& set);

class PromptFactory {
public:
  PromptFactory(PromptTemplateSet set, const LanguageSpec& lang, int diagnostic_cap = 8000);

  // Generation prompt embedding the full class content, exactly once.
  std::string build_class_prompt(const ContainerUnit& container) const;

  // method_name may be kConstructorTarget to request the constructor pass.
  // Throws InputError when method_name is not declared on the container.
  std::string build_method_prompt(const ContainerUnit& container, const std::string& method_name,
                                  const std::string& test_class_name) const;

  // Correction request quoting the tool output verbatim (subject to the
  // truncation cap). Throws InputError on empty diagnostics.
  std::string build_repair_prompt(const std::string& diagnostics) const;

  int diagnostic_cap() const { return diagnostic_cap_; }

private:
  PromptTemplateSet set_;
  std::string language_label_;
  int diagnostic_cap_;
};

// Head/tail truncation used for repair prompts: keeps 75% of the cap from
// the front and 25% from the back with an omission marker between.
std::string truncate_diagnostics(const std::string& text, std::size_t cap);

// Test-class naming. Pattern placeholders: {class}, {method}.
std::string render_name_pattern(const std::string& pattern, const std::string& class_name,
                                const std::string& method_name);

}  // namespace testgen

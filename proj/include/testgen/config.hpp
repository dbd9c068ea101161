#pragma once

#include "testgen/jsonio.hpp"
#include "testgen/orchestrator.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace testgen {

// Minimal TOML reader covering this tool's config schema: comments, one
// level of [section] tables, and key = value with strings (basic and
// multi-line basic), integers, floats, booleans and flat arrays.
struct TomlValue {
  std::variant<std::string, long, double, bool, std::vector<std::string>> value;

  const std::string& as_string() const;
  long as_int() const;
  double as_float() const;
  bool as_bool() const;
};

using TomlSection = std::map<std::string, TomlValue>;
using TomlDocument = std::map<std::string, TomlSection>;  // "" holds root keys

TomlDocument parse_toml(const std::string& text);

// --- run configuration -------------------------------------------------------

struct BackendSettings {
  std::string mode = "live";  // live | replay | scripted
  std::string endpoint_url;
  std::string model_name = "gpt-4o-mini";
  std::string api_key_env = "TESTGEN_API_KEY";
  std::string transcript_path;  // replay mode
  std::string script_path;      // scripted mode
  int max_retries = 3;
};

struct ToolchainSettings {
  std::string kind = "simulated";  // simulated | command
  std::string script_path;         // simulated
  std::string compile_command;
  std::string test_command;
  std::string coverage_command;
  std::string mutation_command;
  std::string test_dir = "generated-tests";
  int compile_timeout_s = 300;
  int test_timeout_s = 60;
};

struct PromptSettings {
  std::string system_message;        // empty = no system turn (default)
  std::string class_template;        // empty = shipped default
  std::string method_template;
  std::string constructor_template;
  std::string repair_template;
  std::string framework_label;       // override for {framework}
  std::string class_test_name = "{class}Test";
  std::string method_test_name = "{class}_{method}_Test";
  std::string constructor_test_name = "{class}_Constructor_Test";
};

struct RunConfig {
  std::string project_root;
  std::string project_label;  // defaults to the root directory name
  GranularityMode mode = GranularityMode::ClassLevel;
  std::string adapter_id = "java";
  BackendSettings backend;
  ToolchainSettings toolchain;
  PromptSettings prompts;
  int workers = 4;
  int repair_limit = 5;
  double temperature = 0.1;
  int diagnostic_cap = 8000;
  bool include_abstract = true;
  int prune_rounds = 3;
  std::string output_dir = "testgen-out";
};

// Reads a TOML config file; relative paths are resolved against the file's
// directory. Throws ConfigError on malformed input or unknown keys.
RunConfig load_config_file(const std::string& path);
void apply_toml(RunConfig& config, const TomlDocument& doc, const std::string& base_dir);

// Invariants: worker bound, repair limit, temperature range, per-mode
// requirements (replay needs a transcript, live needs an endpoint, ...).
void validate_config(const RunConfig& config);

// Effective-config echo stored in run.json and reused by replay-verify.
Json config_to_json(const RunConfig& config);
RunConfig config_from_json(const Json& j);

PromptTemplateSet template_set_from_config(const RunConfig& config, const LanguageSpec& lang);

}  // namespace testgen

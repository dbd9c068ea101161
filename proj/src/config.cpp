#include "testgen/config.hpp"

#include "testgen/errors.hpp"

#include <cctype>
#include <filesystem>

namespace fs = std::filesystem;

namespace testgen {

const std::string& TomlValue::as_string() const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  throw ConfigError("config value is not a string");
}

long TomlValue::as_int() const {
  if (const auto* i = std::get_if<long>(&value)) return *i;
  throw ConfigError("config value is not an integer");
}

double TomlValue::as_float() const {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<long>(&value)) return static_cast<double>(*i);
  throw ConfigError("config value is not a number");
}

bool TomlValue::as_bool() const {
  if (const auto* b = std::get_if<bool>(&value)) return *b;
  throw ConfigError("config value is not a boolean");
}

namespace {

class TomlParser {
public:
  explicit TomlParser(const std::string& text) : text_(text) {}

  TomlDocument run() {
    TomlDocument doc;
    std::string section;
    while (!at_end()) {
      skip_ws_and_comments();
      if (at_end()) break;
      if (peek() == '[') {
        section = parse_section_header();
        doc[section];  // section may stay empty
        continue;
      }
      auto [key, value] = parse_key_value();
      auto& table = doc[section];
      if (table.count(key)) {
        throw ConfigError("duplicate config key: " + qualified(section, key));
      }
      table.emplace(std::move(key), std::move(value));
    }
    return doc;
  }

private:
  const std::string& text_;
  std::size_t i_ = 0;
  int line_ = 1;

  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  char take() {
    char c = text_[i_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  static std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  void skip_ws_and_comments() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') take();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        take();
        continue;
      }
      break;
    }
  }

  void skip_inline_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) take();
  }

  std::string parse_section_header() {
    take();  // '['
    std::string name;
    while (!at_end() && peek() != ']' && peek() != '\n') name += take();
    if (at_end() || peek() != ']') fail("unterminated section header");
    take();
    // Trim.
    std::size_t b = name.find_first_not_of(" \t");
    std::size_t e = name.find_last_not_of(" \t");
    if (b == std::string::npos) fail("empty section name");
    return name.substr(b, e - b + 1);
  }

  std::pair<std::string, TomlValue> parse_key_value() {
    std::string key;
    while (!at_end() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      key += take();
    }
    if (key.empty()) fail("expected a key");
    skip_inline_ws();
    if (at_end() || peek() != '=') fail("expected '=' after key '" + key + "'");
    take();
    skip_inline_ws();
    TomlValue value = parse_value();
    skip_inline_ws();
    if (!at_end() && peek() == '#') {
      while (!at_end() && peek() != '\n') take();
    }
    if (!at_end() && peek() != '\n') fail("trailing characters after value of '" + key + "'");
    return {key, value};
  }

  TomlValue parse_value() {
    if (at_end()) fail("missing value");
    char c = peek();
    if (c == '"') return TomlValue{parse_string()};
    if (c == '[') return TomlValue{parse_array()};
    if (c == 't' || c == 'f') return TomlValue{parse_bool()};
    return parse_number();
  }

  std::string parse_string() {
    take();  // '"'
    if (i_ + 1 < text_.size() && text_[i_] == '"' && text_[i_ + 1] == '"') {
      i_ += 2;
      // Multi-line basic string; a newline right after the opener is trimmed.
      if (!at_end() && peek() == '\n') take();
      std::string out;
      while (!at_end()) {
        if (i_ + 2 < text_.size() + 1 && text_.compare(i_, 3, "\"\"\"") == 0) {
          i_ += 3;
          return out;
        }
        if (peek() == '\\') {
          take();
          out += unescape(take());
          continue;
        }
        out += take();
      }
      fail("unterminated multi-line string");
    }
    std::string out;
    while (!at_end() && peek() != '"') {
      if (peek() == '\n') fail("unterminated string");
      if (peek() == '\\') {
        take();
        if (at_end()) fail("dangling escape");
        out += unescape(take());
        continue;
      }
      out += take();
    }
    if (at_end()) fail("unterminated string");
    take();
    return out;
  }

  char unescape(char c) {
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '"': return '"';
      case '\\': return '\\';
      default: fail(std::string("unsupported escape: \\") + c);
    }
  }

  std::vector<std::string> parse_array() {
    take();  // '['
    std::vector<std::string> out;
    for (;;) {
      skip_ws_and_comments();
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        take();
        return out;
      }
      if (peek() != '"') fail("arrays may hold strings only");
      out.push_back(parse_string());
      skip_ws_and_comments();
      if (!at_end() && peek() == ',') take();
    }
  }

  bool parse_bool() {
    if (text_.compare(i_, 4, "true") == 0) {
      i_ += 4;
      return true;
    }
    if (text_.compare(i_, 5, "false") == 0) {
      i_ += 5;
      return false;
    }
    fail("expected true or false");
  }

  TomlValue parse_number() {
    std::string raw;
    bool is_float = false;
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '_') {
        raw += take();
        continue;
      }
      if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        raw += take();
        continue;
      }
      break;
    }
    if (raw.empty()) fail("expected a value");
    raw.erase(std::remove(raw.begin(), raw.end(), '_'), raw.end());
    try {
      if (is_float) return TomlValue{std::stod(raw)};
      return TomlValue{std::stol(raw)};
    } catch (const std::exception&) {
      fail("malformed number: " + raw);
    }
  }
};

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

TomlDocument parse_toml(const std::string& text) { return TomlParser(text).run(); }

void apply_toml(RunConfig& config, const TomlDocument& doc, const std::string& base_dir) {
  auto get = [&](const std::string& section, const std::string& key) -> const TomlValue* {
    auto s = doc.find(section);
    if (s == doc.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
  };

  static const std::map<std::string, std::vector<std::string>> kKnown = {
      {"", {}},
      {"project",
       {"root", "label", "mode", "output_dir", "include_abstract"}},
      {"backend",
       {"mode", "endpoint_url", "model", "api_key_env", "transcript", "script", "max_retries"}},
      {"prompts",
       {"system_message", "class_template", "method_template", "constructor_template",
        "repair_template", "framework_label", "class_test_name", "method_test_name",
        "constructor_test_name"}},
      {"limits",
       {"workers", "repair_limit", "temperature", "diagnostic_cap", "prune_rounds"}},
      {"adapter",
       {"id", "toolchain", "script", "compile_command", "test_command", "coverage_command",
        "mutation_command", "test_dir", "compile_timeout_s", "test_timeout_s"}},
  };
  for (const auto& [section, table] : doc) {
    auto known = kKnown.find(section);
    if (known == kKnown.end()) {
      throw ConfigError("unknown config section: [" + section + "]");
    }
    for (const auto& [key, value] : table) {
      if (std::find(known->second.begin(), known->second.end(), key) == known->second.end()) {
        throw ConfigError("unknown config key: " + (section.empty() ? key : section + "." + key));
      }
    }
  }

  if (const auto* v = get("project", "root")) config.project_root = resolve_path(v->as_string(), base_dir);
  if (const auto* v = get("project", "label")) config.project_label = v->as_string();
  if (const auto* v = get("project", "mode")) config.mode = granularity_from_string(v->as_string());
  if (const auto* v = get("project", "output_dir")) config.output_dir = resolve_path(v->as_string(), base_dir);
  if (const auto* v = get("project", "include_abstract")) config.include_abstract = v->as_bool();

  if (const auto* v = get("backend", "mode")) config.backend.mode = v->as_string();
  if (const auto* v = get("backend", "endpoint_url")) config.backend.endpoint_url = v->as_string();
  if (const auto* v = get("backend", "model")) config.backend.model_name = v->as_string();
  if (const auto* v = get("backend", "api_key_env")) config.backend.api_key_env = v->as_string();
  if (const auto* v = get("backend", "transcript")) {
    config.backend.transcript_path = resolve_path(v->as_string(), base_dir);
  }
  if (const auto* v = get("backend", "script")) {
    config.backend.script_path = resolve_path(v->as_string(), base_dir);
  }
  if (const auto* v = get("backend", "max_retries")) {
    config.backend.max_retries = static_cast<int>(v->as_int());
  }

  if (const auto* v = get("prompts", "system_message")) config.prompts.system_message = v->as_string();
  if (const auto* v = get("prompts", "class_template")) config.prompts.class_template = v->as_string();
  if (const auto* v = get("prompts", "method_template")) config.prompts.method_template = v->as_string();
  if (const auto* v = get("prompts", "constructor_template")) {
    config.prompts.constructor_template = v->as_string();
  }
  if (const auto* v = get("prompts", "repair_template")) config.prompts.repair_template = v->as_string();
  if (const auto* v = get("prompts", "framework_label")) config.prompts.framework_label = v->as_string();
  if (const auto* v = get("prompts", "class_test_name")) config.prompts.class_test_name = v->as_string();
  if (const auto* v = get("prompts", "method_test_name")) config.prompts.method_test_name = v->as_string();
  if (const auto* v = get("prompts", "constructor_test_name")) {
    config.prompts.constructor_test_name = v->as_string();
  }

  if (const auto* v = get("limits", "workers")) config.workers = static_cast<int>(v->as_int());
  if (const auto* v = get("limits", "repair_limit")) config.repair_limit = static_cast<int>(v->as_int());
  if (const auto* v = get("limits", "temperature")) config.temperature = v->as_float();
  if (const auto* v = get("limits", "diagnostic_cap")) config.diagnostic_cap = static_cast<int>(v->as_int());
  if (const auto* v = get("limits", "prune_rounds")) config.prune_rounds = static_cast<int>(v->as_int());

  if (const auto* v = get("adapter", "id")) config.adapter_id = v->as_string();
  if (const auto* v = get("adapter", "toolchain")) config.toolchain.kind = v->as_string();
  if (const auto* v = get("adapter", "script")) {
    config.toolchain.script_path = resolve_path(v->as_string(), base_dir);
  }
  if (const auto* v = get("adapter", "compile_command")) config.toolchain.compile_command = v->as_string();
  if (const auto* v = get("adapter", "test_command")) config.toolchain.test_command = v->as_string();
  if (const auto* v = get("adapter", "coverage_command")) config.toolchain.coverage_command = v->as_string();
  if (const auto* v = get("adapter", "mutation_command")) config.toolchain.mutation_command = v->as_string();
  if (const auto* v = get("adapter", "test_dir")) config.toolchain.test_dir = v->as_string();
  if (const auto* v = get("adapter", "compile_timeout_s")) {
    config.toolchain.compile_timeout_s = static_cast<int>(v->as_int());
  }
  if (const auto* v = get("adapter", "test_timeout_s")) {
    config.toolchain.test_timeout_s = static_cast<int>(v->as_int());
  }
}

RunConfig load_config_file(const std::string& path) {
  RunConfig config;
  TomlDocument doc = parse_toml(read_text_file(path));
  std::string base = fs::path(path).parent_path().string();
  apply_toml(config, doc, base);
  return config;
}

void validate_config(const RunConfig& config) {
  if (config.project_root.empty()) throw ConfigError("project root is required");
  if (config.workers < 1) throw ConfigError("workers must be >= 1");
  if (config.repair_limit < 0) throw ConfigError("repair_limit must be >= 0");
  if (config.prune_rounds < 0) throw ConfigError("prune_rounds must be >= 0");
  if (config.temperature < 0.0 || config.temperature > 2.0) {
    throw ConfigError("temperature must be within [0, 2]");
  }
  const std::string& mode = config.backend.mode;
  if (mode == "live") {
    if (config.backend.endpoint_url.empty()) {
      throw ConfigError("live backend requires backend.endpoint_url");
    }
    if (config.backend.api_key_env.empty()) {
      throw ConfigError("live backend requires backend.api_key_env");
    }
  } else if (mode == "replay") {
    if (config.backend.transcript_path.empty()) {
      throw ConfigError("replay backend requires backend.transcript");
    }
  } else if (mode == "scripted") {
    if (config.backend.script_path.empty()) {
      throw ConfigError("scripted backend requires backend.script");
    }
  } else {
    throw ConfigError("unknown backend mode: " + mode);
  }
  if (config.toolchain.kind == "simulated") {
    if (config.toolchain.script_path.empty()) {
      throw ConfigError("simulated toolchain requires adapter.script");
    }
  } else if (config.toolchain.kind != "command") {
    throw ConfigError("unknown toolchain kind: " + config.toolchain.kind);
  }
  language_spec(config.adapter_id);  // throws for unknown adapters
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["project_root"] = c.project_root;
  j["project_label"] = c.project_label;
  j["mode"] = to_string(c.mode);
  j["adapter_id"] = c.adapter_id;
  Json backend;
  backend["mode"] = c.backend.mode;
  backend["endpoint_url"] = c.backend.endpoint_url;
  backend["model"] = c.backend.model_name;
  backend["api_key_env"] = c.backend.api_key_env;
  backend["transcript"] = c.backend.transcript_path;
  backend["script"] = c.backend.script_path;
  backend["max_retries"] = c.backend.max_retries;
  j["backend"] = std::move(backend);
  Json tool;
  tool["kind"] = c.toolchain.kind;
  tool["script"] = c.toolchain.script_path;
  tool["compile_command"] = c.toolchain.compile_command;
  tool["test_command"] = c.toolchain.test_command;
  tool["coverage_command"] = c.toolchain.coverage_command;
  tool["mutation_command"] = c.toolchain.mutation_command;
  tool["test_dir"] = c.toolchain.test_dir;
  tool["compile_timeout_s"] = c.toolchain.compile_timeout_s;
  tool["test_timeout_s"] = c.toolchain.test_timeout_s;
  j["toolchain"] = std::move(tool);
  Json prompts;
  prompts["system_message"] = c.prompts.system_message;
  prompts["class_template"] = c.prompts.class_template;
  prompts["method_template"] = c.prompts.method_template;
  prompts["constructor_template"] = c.prompts.constructor_template;
  prompts["repair_template"] = c.prompts.repair_template;
  prompts["framework_label"] = c.prompts.framework_label;
  prompts["class_test_name"] = c.prompts.class_test_name;
  prompts["method_test_name"] = c.prompts.method_test_name;
  prompts["constructor_test_name"] = c.prompts.constructor_test_name;
  j["prompts"] = std::move(prompts);
  j["workers"] = c.workers;
  j["repair_limit"] = c.repair_limit;
  j["temperature"] = c.temperature;
  j["diagnostic_cap"] = c.diagnostic_cap;
  j["include_abstract"] = c.include_abstract;
  j["prune_rounds"] = c.prune_rounds;
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  c.project_root = j.value("project_root", "");
  c.project_label = j.value("project_label", "");
  c.mode = granularity_from_string(j.value("mode", "class"));
  c.adapter_id = j.value("adapter_id", "java");
  if (j.contains("backend")) {
    const Json& b = j["backend"];
    c.backend.mode = b.value("mode", "live");
    c.backend.endpoint_url = b.value("endpoint_url", "");
    c.backend.model_name = b.value("model", "gpt-4o-mini");
    c.backend.api_key_env = b.value("api_key_env", "TESTGEN_API_KEY");
    c.backend.transcript_path = b.value("transcript", "");
    c.backend.script_path = b.value("script", "");
    c.backend.max_retries = b.value("max_retries", 3);
  }
  if (j.contains("toolchain")) {
    const Json& t = j["toolchain"];
    c.toolchain.kind = t.value("kind", "simulated");
    c.toolchain.script_path = t.value("script", "");
    c.toolchain.compile_command = t.value("compile_command", "");
    c.toolchain.test_command = t.value("test_command", "");
    c.toolchain.coverage_command = t.value("coverage_command", "");
    c.toolchain.mutation_command = t.value("mutation_command", "");
    c.toolchain.test_dir = t.value("test_dir", "generated-tests");
    c.toolchain.compile_timeout_s = t.value("compile_timeout_s", 300);
    c.toolchain.test_timeout_s = t.value("test_timeout_s", 60);
  }
  if (j.contains("prompts")) {
    const Json& p = j["prompts"];
    c.prompts.system_message = p.value("system_message", "");
    c.prompts.class_template = p.value("class_template", "");
    c.prompts.method_template = p.value("method_template", "");
    c.prompts.constructor_template = p.value("constructor_template", "");
    c.prompts.repair_template = p.value("repair_template", "");
    c.prompts.framework_label = p.value("framework_label", "");
    c.prompts.class_test_name = p.value("class_test_name", "{class}Test");
    c.prompts.method_test_name = p.value("method_test_name", "{class}_{method}_Test");
    c.prompts.constructor_test_name = p.value("constructor_test_name", "{class}_Constructor_Test");
  }
  c.workers = j.value("workers", 4);
  c.repair_limit = j.value("repair_limit", 5);
  c.temperature = j.value("temperature", 0.1);
  c.diagnostic_cap = j.value("diagnostic_cap", 8000);
  c.include_abstract = j.value("include_abstract", true);
  c.prune_rounds = j.value("prune_rounds", 3);
  c.output_dir = j.value("output_dir", "testgen-out");
  return c;
}

PromptTemplateSet template_set_from_config(const RunConfig& config, const LanguageSpec& lang) {
  PromptTemplateSet set = PromptTemplateSet::defaults(lang);
  if (!config.prompts.class_template.empty()) set.class_template = config.prompts.class_template;
  if (!config.prompts.method_template.empty()) set.method_template = config.prompts.method_template;
  if (!config.prompts.constructor_template.empty()) {
    set.constructor_template = config.prompts.constructor_template;
  }
  if (!config.prompts.repair_template.empty()) set.repair_template = config.prompts.repair_template;
  if (!config.prompts.framework_label.empty()) {
    set.test_framework_label = config.prompts.framework_label;
  }
  validate_templates(set);
  return set;
}

}  // namespace testgen

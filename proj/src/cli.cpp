#include "testgen/cli.hpp"

#include "testgen/errors.hpp"
#include "testgen/metrics.hpp"
#include "testgen/orchestrator.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <iostream>
#include <random>

namespace fs = std::filesystem;

namespace testgen {

namespace {

int g_verbosity = 0;

void log_event(const std::string& level, const std::string& event,
               std::initializer_list<std::pair<const char*, std::string>> fields = {}) {
  if (g_verbosity < 1 && level == "debug") return;
  Json line;
  line["level"] = level;
  line["event"] = event;
  for (const auto& [k, v] : fields) line[k] = v;
  std::cerr << line.dump() << "\n";
}

std::string default_label(const RunConfig& config) {
  if (!config.project_label.empty()) return config.project_label;
  std::string name = fs::path(config.project_root).filename().string();
  return name.empty() ? config.project_root : name;
}

struct Stack {
  std::unique_ptr<LlmBackend> backend;
  std::unique_ptr<Toolchain> toolchain;
  std::unique_ptr<TranscriptWriter> transcript;
  std::unique_ptr<PromptFactory> prompts;
};

Stack build_stack(const RunConfig& config, const LanguageSpec& lang) {
  Stack stack;
  if (config.backend.mode == "live") {
    LiveBackendConfig live;
    live.endpoint_url = config.backend.endpoint_url;
    live.model_name = config.backend.model_name;
    live.api_key_env = config.backend.api_key_env;
    stack.backend = make_live_backend(live);
  } else if (config.backend.mode == "replay") {
    stack.backend = ReplayBackend::from_file(config.backend.transcript_path);
  } else if (config.backend.mode == "scripted") {
    stack.backend = ScriptedBackend::from_file(config.backend.script_path);
  } else {
    throw ConfigError("unknown backend mode: " + config.backend.mode);
  }

  if (config.toolchain.kind == "simulated") {
    stack.toolchain = SimulatedToolchain::from_file(config.toolchain.script_path, lang);
  } else {
    CommandToolchainConfig cmd;
    cmd.compile_command = config.toolchain.compile_command;
    cmd.test_command = config.toolchain.test_command;
    cmd.coverage_command = config.toolchain.coverage_command;
    cmd.mutation_command = config.toolchain.mutation_command;
    cmd.test_dir = config.toolchain.test_dir;
    cmd.compile_timeout_s = config.toolchain.compile_timeout_s;
    cmd.test_timeout_s = config.toolchain.test_timeout_s;
    stack.toolchain = make_command_toolchain(cmd);
  }

  stack.transcript = std::make_unique<TranscriptWriter>();
  stack.prompts = std::make_unique<PromptFactory>(template_set_from_config(config, lang), lang,
                                                  config.diagnostic_cap);
  return stack;
}

OrchestratorOptions orchestrator_options(const RunConfig& config, const std::string& out_dir) {
  OrchestratorOptions opts;
  opts.system_message = config.prompts.system_message;
  opts.repair_limit = config.repair_limit;
  opts.prune_rounds = config.prune_rounds;
  opts.temperature = config.temperature;
  opts.workers = config.workers;
  opts.include_abstract = config.include_abstract;
  opts.class_test_name_pattern = config.prompts.class_test_name;
  opts.method_test_name_pattern = config.prompts.method_test_name;
  opts.constructor_test_name_pattern = config.prompts.constructor_test_name;
  if (config.toolchain.kind == "command") {
    opts.workspace_root = (fs::path(out_dir) / "work").string();
    fs::create_directories(opts.workspace_root);
  }
  return opts;
}

// Executes the configured run and writes the output tree under out_dir.
void generate_into(const RunConfig& config, const std::string& out_dir) {
  const LanguageSpec& lang = language_spec(config.adapter_id);
  ProjectModel project = discover_units(config.project_root, config.adapter_id);
  log_event("info", "discovered",
            {{"containers", std::to_string(project.containers.size())},
             {"methods", std::to_string(project.method_count())}});

  Stack stack = build_stack(config, lang);
  Gateway gateway(*stack.backend, config.backend.model_name,
                  RetryPolicy{config.backend.max_retries, std::chrono::milliseconds(500), nullptr},
                  stack.transcript.get());
  Orchestrator orchestrator(project, gateway, *stack.toolchain, *stack.prompts, lang,
                            orchestrator_options(config, out_dir));

  GenerationRun run = orchestrator.run(config.mode);

  fs::create_directories(out_dir);
  Json run_doc;
  run_doc["config"] = config_to_json(config);
  run_doc["run"] = run_to_json(run);
  save_json_file((fs::path(out_dir) / "run.json").string(), run_doc);
  stack.transcript->save((fs::path(out_dir) / "transcript.jsonl").string());

  for (const auto& file : run.passing_suite) {
    write_text_file((fs::path(out_dir) / "tests" / file.name).string(), file.content);
  }
  for (const auto& [unit_id, artifact] : run.per_unit_artifacts) {
    std::string unit_dir = sanitize_unit_id(unit_id);
    for (const auto& file : artifact.files) {
      write_text_file((fs::path(out_dir) / "artifacts" / unit_dir / file.name).string(),
                      file.content);
    }
    save_json_file((fs::path(out_dir) / "sanitizer" / (unit_dir + ".json")).string(),
                   sanitizer_report_to_json(artifact));
  }

  log_event("info", "run_complete",
            {{"mode", to_string(run.mode)},
             {"requests", std::to_string(run.ledger.total_requests)},
             {"generated", std::to_string(run.ledger.generated_tests)},
             {"passing", std::to_string(run.ledger.passing_tests)},
             {"aborted_units", std::to_string(run.aborted_units.size())}});
}

RunRecord record_from_run_dir(const std::string& run_dir) {
  Json doc = load_json_file((fs::path(run_dir) / "run.json").string());
  if (!doc.contains("run") || !doc.contains("config")) {
    throw IoError("not a run directory (missing run.json contents): " + run_dir);
  }
  RunConfig config = config_from_json(doc["config"]);
  const Json& run = doc["run"];

  RunRecord rec;
  rec.project = default_label(config);
  rec.mode = run.value("mode", "class");
  rec.metrics.total_requests = run["ledger"].value("total_requests", 0L);

  long generated = 0, non_compiling = 0, non_passing = 0;
  for (const auto& unit : run.value("units", Json::array())) {
    generated += unit.value("n_generated", 0L);
    non_compiling += unit.value("n_non_compiling", 0L);
    non_passing += unit.value("n_non_passing", 0L);
    rec.extra.additional_classes += unit["extra_content"].value("additional_classes", 0);
    rec.extra.additional_interfaces += unit["extra_content"].value("additional_interfaces", 0);
    rec.extra.overriding_classes += unit["extra_content"].value("overriding_classes", 0);
    rec.extra.empty_placeholder_classes +=
        unit["extra_content"].value("empty_placeholder_classes", 0);
  }
  rec.metrics.n_generated = generated;
  rec.metrics.n_non_compiling = non_compiling;
  rec.metrics.n_non_passing = non_passing;
  if (generated > 0) {
    rec.metrics.compilation_rate = compilation_rate(generated, non_compiling);
    rec.metrics.passing_rate = passing_rate(generated, non_compiling, non_passing);
  }
  if (run.contains("coverage") && !run["coverage"].is_null()) {
    CoverageSnapshot cov = coverage_from_json(run["coverage"]);
    rec.lines_covered = cov.lines_covered;
    rec.lines_total = cov.lines_total;
    rec.branches_covered = cov.branches_covered;
    rec.branches_total = cov.branches_total;
    rec.metrics.line_cov = cov.lines_total ? double(cov.lines_covered) / cov.lines_total : 0.0;
    rec.metrics.branch_cov =
        cov.branches_total ? double(cov.branches_covered) / cov.branches_total : 0.0;
  }
  if (run.contains("mutation") && !run["mutation"].is_null()) {
    MutationSnapshot mut = mutation_from_json(run["mutation"]);
    rec.mutants_killed = mut.mutants_killed;
    rec.mutants_total = mut.mutants_total;
    rec.metrics.mutation_score =
        mut.mutants_total ? double(mut.mutants_killed) / mut.mutants_total : 0.0;
  }
  return rec;
}

// Byte compare of two directory trees; returns a description of the first
// divergence or an empty string.
std::string compare_trees(const fs::path& expected, const fs::path& actual) {
  auto list = [](const fs::path& root) {
    std::vector<std::string> files;
    if (fs::exists(root)) {
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).generic_string());
      }
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  std::vector<std::string> want = list(expected);
  std::vector<std::string> got = list(actual);
  for (const auto& f : want) {
    if (!std::binary_search(got.begin(), got.end(), f)) {
      return "missing from replay: " + f;
    }
  }
  for (const auto& f : got) {
    if (!std::binary_search(want.begin(), want.end(), f)) {
      return "extra file in replay: " + f;
    }
  }
  for (const auto& f : want) {
    std::string a = read_text_file((expected / f).string());
    std::string b = read_text_file((actual / f).string());
    if (a != b) {
      std::size_t k = 0;
      while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
      return "content diverges in " + f + " at byte " + std::to_string(k);
    }
  }
  return "";
}

}  // namespace

std::string sanitize_unit_id(const std::string& unit_id) {
  std::string out;
  out.reserve(unit_id.size());
  for (char c : unit_id) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') {
      out += c;
    } else {
      out += '_';
    }
  }
  return out;
}

int cmd_generate(const RunConfig& config) {
  validate_config(config);
  generate_into(config, config.output_dir);
  return 0;
}

int cmd_units(const RunConfig& config, const std::string& out_path) {
  if (config.project_root.empty()) throw ConfigError("project root is required");
  ProjectModel project = discover_units(config.project_root, config.adapter_id);
  Json doc = units_to_json(project);
  if (out_path.empty() || out_path == "-") {
    std::cout << doc.dump(2) << "\n";
  } else {
    save_json_file(out_path, doc);
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
               bool per_class) {
  std::vector<RunRecord> records;
  std::map<std::string, std::vector<double>> per_class_samples;
  for (const auto& dir : run_dirs) {
    records.push_back(record_from_run_dir(dir));
    if (per_class) {
      Json doc = load_json_file((fs::path(dir) / "run.json").string());
      std::string mode = doc["run"].value("mode", "class");
      for (const auto& unit : doc["run"].value("units", Json::array())) {
        long generated = unit.value("n_generated", 0L);
        if (generated == 0) continue;
        per_class_samples[mode].push_back(
            passing_rate(generated, unit.value("n_non_compiling", 0L),
                         unit.value("n_non_passing", 0L)));
      }
    }
  }
  emit_report(records, out_dir, per_class_samples);
  log_event("info", "report_written", {{"dir", out_dir}, {"runs", std::to_string(records.size())}});
  return 0;
}

int cmd_replay_verify(const std::string& run_dir) {
  Json doc = load_json_file((fs::path(run_dir) / "run.json").string());
  if (!doc.contains("config") || !doc.contains("run")) {
    throw IoError("not a run directory: " + run_dir);
  }
  RunConfig config = config_from_json(doc["config"]);
  config.backend.mode = "replay";
  config.backend.transcript_path = (fs::path(run_dir) / "transcript.jsonl").string();

  std::random_device rd;
  fs::path scratch = fs::temp_directory_path() /
                     ("testgen-verify-" + std::to_string(rd()) + "-" + std::to_string(::getpid()));
  config.output_dir = scratch.string();

  int exit_code = 0;
  std::string divergence;
  try {
    generate_into(config, config.output_dir);
    for (const char* sub : {"tests", "artifacts", "sanitizer"}) {
      divergence = compare_trees(fs::path(run_dir) / sub, scratch / sub);
      if (!divergence.empty()) {
        divergence = std::string(sub) + ": " + divergence;
        break;
      }
    }
    if (divergence.empty()) {
      Json redone = load_json_file((scratch / "run.json").string());
      if (redone["run"]["ledger"] != doc["run"]["ledger"]) {
        divergence = "ledger diverges: recorded " + doc["run"]["ledger"].dump() + " vs replayed " +
                     redone["run"]["ledger"].dump();
      }
    }
    if (divergence.empty()) {
      std::string recorded = read_text_file((fs::path(run_dir) / "transcript.jsonl").string());
      std::string replayed = read_text_file((scratch / "transcript.jsonl").string());
      if (recorded != replayed) {
        divergence = "re-recorded transcript diverges from the original";
      }
    }
  } catch (const ReplayDesync& e) {
    divergence = std::string("replay desync: ") + e.what();
  }

  std::error_code ec;
  fs::remove_all(scratch, ec);

  if (!divergence.empty()) {
    std::cout << "replay-verify FAILED: " << divergence << "\n";
    exit_code = 1;
  } else {
    std::cout << "replay-verify OK: artifacts and ledger reproduced byte-identically\n";
  }
  return exit_code;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"LLM unit test generation workflows with repair loop and metrics"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags remain valid after the subcommand name

  std::string config_path;
  app.add_option("--config", config_path, "TOML configuration file")->configurable(false);
  app.add_flag_function("-v,--verbose", [](std::int64_t n) { g_verbosity = static_cast<int>(n); },
                        "Verbose logging");

  // generate
  auto* generate = app.add_subcommand("generate", "Run a generation workflow end to end");
  std::string g_project, g_mode, g_backend, g_model, g_transcript, g_out;
  int g_workers = -1;
  generate->add_option("--project", g_project, "Project root to test");
  generate->add_option("--mode", g_mode, "class | method | combined | hybrid");
  generate->add_option("--backend", g_backend, "live | replay | scripted");
  generate->add_option("--model", g_model, "Model name for live requests");
  generate->add_option("--transcript", g_transcript, "Transcript for replay mode");
  generate->add_option("--workers", g_workers, "Worker bound");
  generate->add_option("--out", g_out, "Output directory");

  // units
  auto* units = app.add_subcommand("units", "Dump the discovered unit inventory");
  std::string u_project, u_out;
  units->add_option("--project", u_project, "Project root");
  units->add_option("--out", u_out, "Write units.json here instead of stdout");

  // report
  auto* report = app.add_subcommand("report", "Cross-run comparison tables and significance");
  std::vector<std::string> r_dirs;
  std::string r_out = "report";
  bool r_per_class = false;
  report->add_option("run_dirs", r_dirs, "Run directories")->required();
  report->add_option("--out", r_out, "Report output directory");
  report->add_flag("--per-class", r_per_class,
                   "Feed per-class passing rates to the significance test instead of "
                   "per-project values");

  // replay-verify
  auto* verify = app.add_subcommand("replay-verify", "Re-execute a run against its transcript");
  std::string v_dir;
  verify->add_option("run_dir", v_dir, "Run directory to verify")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config_file(config_path);

    if (generate->parsed()) {
      if (!g_project.empty()) config.project_root = g_project;
      if (!g_mode.empty()) config.mode = granularity_from_string(g_mode);
      if (!g_backend.empty()) config.backend.mode = g_backend;
      if (!g_model.empty()) config.backend.model_name = g_model;
      if (!g_transcript.empty()) config.backend.transcript_path = g_transcript;
      if (g_workers > 0) config.workers = g_workers;
      if (!g_out.empty()) config.output_dir = g_out;
      return cmd_generate(config);
    }
    if (units->parsed()) {
      if (!u_project.empty()) config.project_root = u_project;
      return cmd_units(config, u_out);
    }
    if (report->parsed()) {
      return cmd_report(r_dirs, r_out, r_per_class);
    }
    if (verify->parsed()) {
      return cmd_replay_verify(v_dir);
    }
  } catch (const ConfigError& e) {
    log_event("error", "config_error", {{"message", e.what()}});
    return 2;
  } catch (const InputError& e) {
    log_event("error", "input_error", {{"message", e.what()}});
    return 2;
  } catch (const Error& e) {
    log_event("error", "failure", {{"message", e.what()}});
    return 1;
  } catch (const std::exception& e) {
    log_event("error", "unexpected", {{"message", e.what()}});
    return 1;
  }
  return 2;
}

}  // namespace testgen

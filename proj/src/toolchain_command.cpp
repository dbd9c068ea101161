#include "testgen/errors.hpp"
#include "testgen/subprocess.hpp"
#include "testgen/toolchain.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace testgen {

namespace {

std::string substitute(std::string cmd, const std::string& workspace) {
  const std::string key = "{workspace}";
  std::size_t pos = 0;
  while ((pos = cmd.find(key, pos)) != std::string::npos) {
    cmd.replace(pos, key.size(), workspace);
    pos += workspace.size();
  }
  return cmd;
}

class CommandToolchain : public Toolchain {
public:
  explicit CommandToolchain(CommandToolchainConfig config) : config_(std::move(config)) {}

  std::vector<Diagnostic> compile(const Workspace& ws,
                                  const std::vector<SourceFile>& files) override {
    materialize(ws, files);
    Json doc = invoke(ws, config_.compile_command, "compile",
                      std::chrono::seconds(config_.compile_timeout_s));
    std::vector<Diagnostic> out;
    for (const auto& jd : doc.value("diagnostics", Json::array())) {
      out.push_back(diagnostic_from_json(jd));
    }
    return out;
  }

  std::vector<TestVerdict> run_tests(const Workspace& ws,
                                     const std::vector<SourceFile>& files) override {
    materialize(ws, files);
    auto budget = std::chrono::seconds(
        config_.test_timeout_s * std::max<std::size_t>(std::size_t{1}, files.size()));
    Json doc = invoke(ws, config_.test_command, "test", budget);
    std::vector<TestVerdict> out;
    for (const auto& jv : doc.value("verdicts", Json::array())) {
      out.push_back(verdict_from_json(jv));
    }
    return out;
  }

  CoverageSnapshot coverage(const Workspace& ws, const std::vector<SourceFile>& suite) override {
    materialize(ws, suite);
    try {
      Json doc = invoke(ws, config_.coverage_command, "coverage",
                        std::chrono::seconds(config_.compile_timeout_s));
      return coverage_from_json(doc);
    } catch (const CoverageUnavailable&) {
      throw;
    } catch (const Error& e) {
      throw CoverageUnavailable(e.what());
    }
  }

  MutationSnapshot mutation_score(const Workspace& ws,
                                  const std::vector<SourceFile>& suite) override {
    materialize(ws, suite);
    Json doc = invoke(ws, config_.mutation_command, "mutation",
                      std::chrono::seconds(config_.compile_timeout_s));
    return mutation_from_json(doc);
  }

private:
  void materialize(const Workspace& ws, const std::vector<SourceFile>& files) {
    if (ws.root.empty()) {
      throw EnvironmentError("command toolchain requires a workspace directory");
    }
    fs::path dir = fs::path(ws.root) / config_.test_dir;
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
    for (const auto& file : files) {
      fs::path target = dir / file.name;
      fs::create_directories(target.parent_path(), ec);
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      if (!out) throw EnvironmentError("cannot write test file: " + target.string());
      out << file.content;
    }
  }

  Json invoke(const Workspace& ws, const std::string& command, const std::string& what,
              std::chrono::seconds timeout) {
    if (command.empty()) {
      throw EnvironmentError(what + " command is not configured");
    }
    ProcessResult res = run_shell(substitute(command, ws.root), ws.root, timeout);
    if (res.timed_out) {
      throw ToolTimeout(what + " command timed out after " + std::to_string(timeout.count()) +
                        "s");
    }
    if (res.exit_code == 127 || res.exit_code == 126) {
      throw EnvironmentError(what + " command failed to start: " +
                             (res.stderr_text.empty() ? "command not found" : res.stderr_text));
    }
    try {
      return Json::parse(res.stdout_text);
    } catch (const std::exception&) {
      throw Error(what + " command exited with " + std::to_string(res.exit_code) +
                  " and unparseable output: " + res.stderr_text.substr(0, 400));
    }
  }

  CommandToolchainConfig config_;
};

}  // namespace

std::unique_ptr<Toolchain> make_command_toolchain(CommandToolchainConfig config) {
  return std::make_unique<CommandToolchain>(std::move(config));
}

}  // namespace testgen

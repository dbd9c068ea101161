#pragma once

#include <chrono>
#include <string>

namespace testgen {

struct ProcessResult {
  int exit_code = 0;  // negative: terminated by signal -exit_code
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
};

// Runs `command` through /bin/sh -c in `cwd`, capturing both streams.
// On timeout the process group is killed and timed_out is set.
ProcessResult run_shell(const std::string& command, const std::string& cwd,
                        std::chrono::seconds timeout);

}  // namespace testgen

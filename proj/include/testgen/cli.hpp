#pragma once

#include "testgen/config.hpp"

#include <string>
#include <vector>

namespace testgen {

// Exit codes: 0 success, 1 environment/verification failure, 2 usage error.
int cli_main(int argc, char** argv);

int cmd_generate(const RunConfig& config);
int cmd_units(const RunConfig& config, const std::string& out_path);
int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
               bool per_class = false);
int cmd_replay_verify(const std::string& run_dir);

// Filesystem-safe encoding of a unit id for per-unit output paths.
std::string sanitize_unit_id(const std::string& unit_id);

}  // namespace testgen

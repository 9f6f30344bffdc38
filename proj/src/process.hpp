#pragma once

#include <string>
#include <vector>

namespace codebench::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv[0] found on PATH without a shell and captures both streams.
// Standard input comes from stdin_path (default /dev/null).
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_path = "/dev/null");

}  // namespace codebench::detail

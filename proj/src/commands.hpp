#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace yyf {

const char* version_string();

struct CommandOptions {
  std::string out_dir;  // empty: the config's output.dir
  int workers = 1;
  std::ostream* log = nullptr;
};

/// Runs simulate | filter | baseline | sweep | validate. Returns 0 when every
/// requested check passed, 1 otherwise; module errors propagate as yyf::Error.
int run_command(const ExperimentConfig& config, const std::string& command, const CommandOptions& options);

const std::vector<std::string>& command_names();

}  // namespace yyf

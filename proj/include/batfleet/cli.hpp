/*
 * cli.hpp
 *
 * `batfleet <command> [--config FILE] [--demand CSV] [--out DIR] [--set k=v]...
 *           [--gap G] [--seed S]`
 *
 * Commands: prognosis, degrade, plan, sweep, compare.
 * Exit codes: 0 ok, 2 input error, 3 infeasible, 4 solver limit, 5 internal.
 */
#pragma once

#include "batfleet/kv_file.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace batfleet::cli {

enum ExitCode : int
{
  exit_ok = 0,
  exit_input = 2,
  exit_infeasible = 3,
  exit_limit = 4,
  exit_internal = 5,
};

/// Built-in parameter set: the baseline fleet experiment on LFP cells.
KeyValues default_config();

/// Every key a config file or --set may name.
const std::vector<std::string>& known_keys();

/// defaults <- file <- overrides, rejecting unknown keys.
KeyValues resolve_config(const std::string& config_path, const std::vector<std::string>& overrides);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace batfleet::cli

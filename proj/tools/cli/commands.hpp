#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cli/run_config.hpp"

namespace amf::cli {

const std::vector<std::string>& test_names();

void cmd_fit(const RunConfig& config);
void cmd_test(const RunConfig& config, std::string_view test_name);
void cmd_report(const RunConfig& config);
void cmd_synth(const RunConfig& config);
void cmd_compare(const RunConfig& config);

/// Full command-line entry point; returns the process exit code
/// (0 ok, 2 config, 3 data, 4 numerical).
int run(int argc, char** argv);

}  // namespace amf::cli

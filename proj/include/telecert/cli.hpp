#pragma once

#include <string>
#include <vector>

namespace telecert {

/// Runs the command-line front end. Exit codes: 0 success (or certified),
/// 1 error, 2 suspicious CHSH (violation with failing checks),
/// 3 inconclusive certification, 4 assumption violated.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace telecert

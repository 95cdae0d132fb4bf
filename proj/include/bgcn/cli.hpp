#pragma once

namespace bgcn {

// Entry point for the bgcn command-line tool. Exit codes: 0 success,
// 1 runtime failure, 2 usage or validation error.
int run_cli(int argc, char** argv);

}  // namespace bgcn

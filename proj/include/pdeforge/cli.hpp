#pragma once

namespace pdeforge {

/// Full command-line driver. Exit codes: 0 success, 1 runtime failure,
/// 2 usage or configuration error.
int run_cli(int argc, const char* const* argv);

} // namespace pdeforge

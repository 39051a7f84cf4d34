#pragma once

#include <ostream>

namespace ordshift {

/// Runs the command line tool. Returns the process exit code: 0 success,
/// 2 data error, 3 fit failure of the requested structure, 4 usage error.
/// Errors are written to `err` as one line, "E_CODE: message".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordshift

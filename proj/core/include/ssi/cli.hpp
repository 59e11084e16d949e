#pragma once

#include <string>
#include <vector>

namespace ssi {

/// Runs one CLI command (impute / tune / fit / simulate / bench).
/// `args` excludes the program name. Returns the process exit code:
/// 0 success, 1 usage, 2 data error, 3 numeric failure. Failures print one
/// machine-readable line on stderr.
int cli_dispatch(const std::vector<std::string>& args);

int cli_main(int argc, char** argv);

}  // namespace ssi

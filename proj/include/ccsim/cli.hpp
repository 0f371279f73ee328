#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccsim::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kNumeric = 2,
    kSimulationCap = 3,
    kIo = 4,
};

// args excludes the program name. Artifacts go to `out` unless --output is
// given; diagnostics go to `err` as a single line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccsim::cli

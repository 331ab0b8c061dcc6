#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtest::cli {

/// Process exit statuses. The statistical decision is never encoded here.
enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kUsageError = 2,
    kIoError = 3,
    kMissingTable = 4,
    kDegenerateData = 5,
};

/// Entry point of the `mtest` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtest::cli

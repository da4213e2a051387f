#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pvim::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kBadArguments = 2, kRefused = 3, kAuditFail = 4 };

/// Runs one command line (without the program name). JSON goes to `out`,
/// human-readable errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pvim::cli

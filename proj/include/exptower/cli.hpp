#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exptower::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidSpec = 2,
  kSolveFailed = 3,
  kBuildFailed = 4,
  kCertifyFailed = 5,
  kLoadFailed = 6,
  kNumericalFailure = 7,
};

/// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exptower::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sap/errors.hpp"

namespace sap::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kParseFailure = 3,
  kAttentionFormatFailure = 4,
  kMaskFormatFailure = 5,
  kInvalidArgumentFailure = 6,
  kDegenerateCorpusFailure = 7,
  kShapeMismatchFailure = 8,
  kUnknownLabelFailure = 9,
  kOracleFailure = 10,
  kIoFailure = 11,
};

int exit_code_for(ErrorCode code);

/// Entry point of the `sap` tool. Output and diagnostics go to the given streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sap::cli

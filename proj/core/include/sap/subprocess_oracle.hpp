#pragma once

#include <filesystem>
#include <string>

#include "sap/cfilter.hpp"

namespace sap {

/// Runs an external command per evaluation. Every "{mask}" in the command
/// template is replaced by the (shell-quoted) path of a temporary file holding
/// the mask JSON; the command must exit 0 and print one decimal number on a
/// single stdout line. Anything else raises OracleError.
///
/// Invocations are serial.
class SubprocessOracle final : public EvalOracle {
 public:
  explicit SubprocessOracle(std::string command_template,
                            std::filesystem::path scratch_dir = std::filesystem::temp_directory_path());
  ~SubprocessOracle() override;

  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;

  double evaluate(const PruneMask& mask) override;

  std::size_t invocations() const { return invocations_; }

 private:
  std::string command_template_;
  std::filesystem::path work_dir_;
  std::size_t invocations_ = 0;
};

/// Parses the oracle's stdout: exactly one non-empty line holding a finite decimal.
double parse_oracle_output(const std::string& output);

}  // namespace sap

#include "sap/subprocess_oracle.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "sap/errors.hpp"

namespace sap {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string substitute(const std::string& tmpl, const std::string& value) {
  static const std::string kPlaceholder = "{mask}";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = tmpl.find(kPlaceholder, pos);
    if (hit == std::string::npos) break;
    out.append(tmpl, pos, hit - pos);
    out += value;
    pos = hit + kPlaceholder.size();
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

}  // namespace

SubprocessOracle::SubprocessOracle(std::string command_template, std::filesystem::path scratch_dir)
    : command_template_(std::move(command_template)) {
  if (command_template_.find("{mask}") == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "oracle command must contain the {mask} placeholder");
  }
  std::string pattern = (scratch_dir / "sap-oracle-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw Error(ErrorCode::kIo, "cannot create oracle scratch directory: " + std::string(std::strerror(errno)));
  }
  work_dir_ = pattern;
}

SubprocessOracle::~SubprocessOracle() {
  std::error_code ec;
  std::filesystem::remove_all(work_dir_, ec);
}

double parse_oracle_output(const std::string& output) {
  std::string text = output;
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.pop_back();
  if (text.empty()) throw OracleError(std::nullopt, "oracle printed nothing");
  if (text.find('\n') != std::string::npos) throw OracleError(std::nullopt, "oracle printed more than one line");
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double value = 0.0;
  in >> value;
  if (!in || !(in >> std::ws).eof()) throw OracleError(std::nullopt, "unparsable oracle output '" + text + "'");
  if (!std::isfinite(value)) throw OracleError(std::nullopt, "non-finite oracle output");
  return value;
}

double SubprocessOracle::evaluate(const PruneMask& mask) {
  const auto mask_path = work_dir_ / ("mask-" + std::to_string(invocations_++) + ".json");
  write_mask_file(mask, mask_path);
  const std::string command = substitute(command_template_, shell_quote(mask_path.string()));

  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(command.c_str(), "r"), ::pclose);
  if (!pipe) throw OracleError(std::nullopt, "cannot start '" + command + "'");
  std::string output;
  char buf[4096];
  while (const std::size_t got = std::fread(buf, 1, sizeof buf, pipe.get())) output.append(buf, got);
  const int status = ::pclose(pipe.release());
  std::filesystem::remove(mask_path);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw OracleError(std::nullopt, "command exited with status " +
                                        std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  return parse_oracle_output(output);
}

}  // namespace sap

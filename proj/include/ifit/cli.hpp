#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ifit::cli {

enum ExitCode : int { kSuccess = 0, kHardError = 1, kVerificationFailed = 2 };

struct Options {
  unsigned threads = 0;  // 0: hardware concurrency
  bool force = false;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int reps = 3;
};

int run(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err);
int verify(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err);
int bench(const std::string& config_path, const Options& opt, std::ostream& out, std::ostream& err);

// Parses argv and dispatches; returns the process exit status.
int main(int argc, char** argv);

}  // namespace ifit::cli

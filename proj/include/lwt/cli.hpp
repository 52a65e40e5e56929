#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lwt::cli {

inline constexpr std::string_view kVersion = "1.0.0";

/// Exit statuses by failure category.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfiguration = 3,
  kFormat = 4,
  kIo = 5,
};

/// Runs one invocation; `args` excludes the program name. Subcommands:
/// synth, cv, predict, report.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lwt::cli

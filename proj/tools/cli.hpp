#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pide::cli {

enum ExitCode : int { kOk = 0, kAnalysisErrors = 1, kUsage = 2 };

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment lookup.
[[nodiscard]] std::optional<std::string> process_env(const std::string& name);

/// Run the command line `args` (without the program name). Reports go to
/// `out`, problems with the tool itself to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env);

}  // namespace pide::cli

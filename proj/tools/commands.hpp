#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace hdmetric::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kFlagError = 2,
    kInfeasible = 3,
    kIoError = 4,
};

/// A command failed with a specific exit code.
class CommandError : public std::runtime_error {
public:
    CommandError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

struct CommandOutput {
    std::string stdout_text;  ///< what the command prints
    std::string out_path;     ///< primary output file
};

/// Run a command from its full parameter set. Writes the primary output file
/// (params["out"]) and its manifest (<out>.manifest.json). Throws CommandError.
CommandOutput run_command(const std::string& command, const nlohmann::json& params);

/// Re-run the command recorded in a manifest; out_override replaces the
/// recorded output path when non-empty.
CommandOutput replay(const std::string& manifest_path, const std::string& out_override);

}  // namespace hdmetric::cli

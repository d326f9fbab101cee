#pragma once

#include "contact/config.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace contact {

enum ExitCode : int {
    kExitPass = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitNoConvergence = 3,
    kExitAuditFail = 4,
};

// Flags shared by every subcommand.
struct CliOptions {
    std::string command;
    std::optional<std::string> config_path; // built-in defaults when absent
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0; // 0: hardware concurrency
    bool force = false;
};

// Environment variable that overrides the output directory when --out is not
// given; the only configuration read from the environment.
inline constexpr const char* kOutDirEnv = "CONTACT_OUT_DIR";

const std::vector<std::string>& command_names();

// Maps a library exception to its exit code: configuration and resolution
// problems 2, solver and series non-convergence 3, anything else 1.
int exit_code_for(const std::exception& e);

// Parses the configuration, validates it completely, then runs. Nothing is
// written when validation fails. Progress goes to `out`, diagnostics to `err`.
int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err);

// Same, with the configuration given as text (for tests).
int run_command_text(const CliOptions& opt, const std::string& config_text, std::ostream& out, std::ostream& err);

} // namespace contact

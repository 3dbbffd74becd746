#pragma once

// Command-line driver: JSON run configs, the four commands, and the exit-code
// contract (0 complete, 1 config error, 2 numerically incomplete).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace idset::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfig = 1, kIncomplete = 2 };

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

struct RunContext {
    std::string config_text;  ///< canonical JSON
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
};

/// Runs one command on a config file. `output_override` replaces the
/// config's output_dir when nonempty.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& output_override = {}, int verbosity = 0);

/// Same, with the config given as JSON text.
int run_command_text(const std::string& command, const std::string& config_json,
                     const std::filesystem::path& output_override = {}, int verbosity = 0);

/// argv entry point used by idtool.
int main(int argc, char** argv);

}  // namespace idset::cli

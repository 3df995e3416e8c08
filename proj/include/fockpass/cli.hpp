// cli.hpp: command dispatch for the fockpass tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fockpass::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3, validation_error = 4 };

struct RunRequest {
    std::string command;
    std::filesystem::path config_path;  // empty: all defaults
    std::filesystem::path out_dir{"."};
    std::vector<std::string> overrides;  // key.path=value
    int workers{0};                      // 0: default_workers()
    bool display_offset{false};
};

// Executes one command, writing outputs and manifest.json under out_dir.
// Errors are reported on `err` and mapped to the exit codes above.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

// Parses a command line (argv[0] included) and calls run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a, used for the config hash in the manifest.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace fockpass::cli

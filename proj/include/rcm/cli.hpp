#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rcm::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3, statistical_error = 4 };

/// Flat key=value parameters for one subcommand. Keys not set take the
/// subcommand's documented defaults.
struct ExperimentConfig {
    std::string command;
    std::map<std::string, std::string> values;
    std::filesystem::path out_dir = "out";
};

/// Parses "key=value" lines; '#' starts a comment. A "command" key, if
/// present, sets the subcommand.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

std::vector<std::string> subcommands();

/// Defaults of one subcommand, key -> value. Throws for unknown subcommands.
const std::map<std::string, std::string>& defaults_for(const std::string& command);

/// Config with every default filled in; `defaulted` receives the keys that
/// were not set explicitly. Throws std::invalid_argument for unknown keys.
ExperimentConfig resolve(const ExperimentConfig& config, std::vector<std::string>* defaulted = nullptr);

/// Runs one experiment, writing artifacts and manifest.txt into
/// config.out_dir. Diagnostics go to `log`. Returns an ExitCode.
int run(const ExperimentConfig& config, std::ostream& log);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& file);

}  // namespace rcm::cli

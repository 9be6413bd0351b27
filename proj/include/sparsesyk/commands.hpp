// commands.hpp: config-driven pipelines behind the command-line subcommands
//
// Every command owns a table of default keys. A user config is merged onto
// the defaults; unknown keys are rejected, and the merged config is what gets
// snapshotted into the run directory.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssyk::cli {

struct CommandSpec {
    std::string name;
    std::string summary;
    nlohmann::json defaults;
    std::function<nlohmann::json(const nlohmann::json& config, const std::filesystem::path& out_dir)> run;
};

const std::vector<CommandSpec>& commands();

// Throws DomainError for an unknown command name.
const CommandSpec& find_command(const std::string& name);

// defaults <- config, key by key. Throws DomainError naming the first unknown
// key or a value whose JSON type differs from the default (null defaults
// accept anything).
nlohmann::json resolve_config(const CommandSpec& spec, const nlohmann::json& config);

// Parses a `key=value` override; the value is read as JSON when possible and
// as a bare string otherwise. Nested keys use dots: `grid.n=256`.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Resolves the config, runs the command into out_dir and returns its summary.
nlohmann::json run_command(const std::string& name, const nlohmann::json& config,
                           const std::filesystem::path& out_dir);

} // namespace ssyk::cli

// io.hpp: CSV/JSON output and per-run output directories

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssyk::io {

inline constexpr int kSchemaVersion = 1;

// Column-oriented numeric table. Every column must have the same length.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    void add(std::string name, std::vector<double> values);
    std::size_t rows() const;
};

// Comma separated, header row, every value printed with %.12e. Provenance
// lines (`# key=value`) go first when given. Throws IoError.
void write_csv(const std::filesystem::path& path, const Table& table,
               const std::vector<std::string>& provenance = {});
Table read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

// One directory per run: config.json (the resolved config, deterministic),
// and meta.json (timestamp, written separately so primary outputs stay
// byte-identical across reruns).
class RunDirectory {
public:
    RunDirectory(std::filesystem::path root, const nlohmann::json& config);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path file(const std::string& name) const { return root_ / name; }

    // `# config=<compact json>` line for CSV headers.
    std::vector<std::string> provenance() const;

    void write_table(const std::string& name, const Table& table) const;
    void write_summary(const nlohmann::json& summary) const;
    void write_sidecar(const nlohmann::json& extra = {}) const;

private:
    std::filesystem::path root_;
    nlohmann::json config_;
};

} // namespace ssyk::io

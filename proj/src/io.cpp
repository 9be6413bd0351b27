#include "sparsesyk/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sparsesyk/error.hpp"

namespace ssyk::io {

namespace fs = std::filesystem;

void Table::add(std::string name, std::vector<double> values)
{
    if (!columns.empty() && values.size() != columns.front().size())
        throw DomainError("Table::add: column '" + name + "' has " + std::to_string(values.size()) +
                          " rows, expected " + std::to_string(columns.front().size()));
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
}

std::size_t Table::rows() const
{
    return columns.empty() ? 0 : columns.front().size();
}

void write_csv(const fs::path& path, const Table& table, const std::vector<std::string>& provenance)
{
    if (table.header.size() != table.columns.size()) throw DomainError("write_csv: header/column count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& line : provenance) out << "# " << line << '\n';
    for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.12e", table.columns[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Table read_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (!have_header) {
                t.header.push_back(cell);
                t.columns.emplace_back();
            } else {
                if (c >= t.columns.size()) throw IoError(path.string() + ": ragged row");
                try {
                    t.columns[c].push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw IoError(path.string() + ": bad number '" + cell + "'");
                }
            }
            ++c;
        }
        if (have_header && c != t.columns.size()) throw IoError(path.string() + ": ragged row");
        have_header = true;
    }
    return t;
}

void write_json(const fs::path& path, const nlohmann::json& value)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

RunDirectory::RunDirectory(fs::path root, const nlohmann::json& config) : root_(std::move(root)), config_(config)
{
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create output directory " + root_.string() + ": " + ec.message());
    write_json(file("config.json"), config_);
}

std::vector<std::string> RunDirectory::provenance() const
{
    return {"schema_version=" + std::to_string(kSchemaVersion), "config=" + config_.dump()};
}

void RunDirectory::write_table(const std::string& name, const Table& table) const
{
    write_csv(file(name), table, provenance());
}

void RunDirectory::write_summary(const nlohmann::json& summary) const
{
    nlohmann::json out = summary;
    out["schema_version"] = kSchemaVersion;
    out["config"] = config_;
    write_json(file("summary.json"), out);
}

void RunDirectory::write_sidecar(const nlohmann::json& extra) const
{
    nlohmann::json meta = extra.is_null() ? nlohmann::json::object() : extra;
    const auto now = std::chrono::system_clock::now();
    meta["finished_unix_seconds"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    write_json(file("meta.json"), meta);
}

} // namespace ssyk::io

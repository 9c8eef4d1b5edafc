#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace treenet::cli {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double x);

// Writes a CSV file: one provenance comment line, the header, then rows.
void write_csv(const std::filesystem::path& path, const std::string& provenance, const Table& table);

// Writes {"provenance": ..., "columns": [...], "rows": [{...}], ...extra}.
void write_table_json(const std::filesystem::path& path, const nlohmann::json& provenance, const Table& table,
                      const nlohmann::json& extra = nlohmann::json::object());

void write_json(const std::filesystem::path& path, const nlohmann::json& document);

// JSON value for a double; non-finite values become null.
nlohmann::json number(double x);

}  // namespace treenet::cli

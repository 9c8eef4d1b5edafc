#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "treenet/error.hpp"

namespace treenet::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write output file '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw ValidationError("failed writing output file '" + path.string() + "'");
}

std::string cell_text(const Cell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    return std::get<std::string>(cell);
}

nlohmann::json cell_json(const Cell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
    if (const auto* d = std::get_if<double>(&cell)) return number(*d);
    return std::get<std::string>(cell);
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

void write_csv(const std::filesystem::path& path, const std::string& provenance, const Table& table) {
    auto out = open_output(path);
    out << "# " << provenance << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
        out << '\n';
    }
    finish(out, path);
}

void write_table_json(const std::filesystem::path& path, const nlohmann::json& provenance, const Table& table,
                      const nlohmann::json& extra) {
    nlohmann::json doc = extra;
    doc["provenance"] = provenance;
    doc["columns"] = table.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    write_json(path, doc);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& document) {
    auto out = open_output(path);
    out << document.dump(2) << '\n';
    finish(out, path);
}

}  // namespace treenet::cli

#include "qphase/emit.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qphase {

namespace {

std::string csv_cell(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    const auto& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string json_cell(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return std::isfinite(*d) ? format_double(*d) : "null";
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return json_string(std::get<std::string>(cell));
}

// Comment lines must stay on one line.
std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

} // namespace

Format parse_format(std::string_view text) {
    if (text == "csv") return Format::csv;
    if (text == "json") return Format::json;
    throw std::invalid_argument("unknown format '" + std::string(text) + "' (expected csv or json)");
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_table(const Table& table, Format format, std::ostream& out) {
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw std::logic_error("write_table: row width differs from header");
    }

    if (format == Format::csv) {
        for (const auto& [key, value] : table.meta) out << "# " << key << '=' << one_line(csv_cell(value)) << '\n';
        for (const auto& w : table.warnings) out << "# warning: " << one_line(w) << '\n';
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
            out << '\n';
        }
        return;
    }

    out << "{\n  \"meta\": {";
    for (std::size_t i = 0; i < table.meta.size(); ++i) {
        out << (i ? ", " : "") << json_string(table.meta[i].first) << ": " << json_cell(table.meta[i].second);
    }
    out << "},\n  \"warnings\": [";
    for (std::size_t i = 0; i < table.warnings.size(); ++i) out << (i ? ", " : "") << json_string(table.warnings[i]);
    out << "],\n  \"columns\": [";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? ", " : "") << json_string(table.columns[i]);
    out << "],\n  \"rows\": [";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << (r ? ",\n    {" : "\n    {");
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? ", " : "") << json_string(table.columns[c]) << ": " << json_cell(table.rows[r][c]);
        }
        out << '}';
    }
    out << (table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

} // namespace qphase

// emit.hpp: tabular records and their CSV / JSON serialisation.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace qphase {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::pair<std::string, Cell>> meta;  // resolved configuration, in order
    std::vector<std::string> warnings;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_meta(std::string key, Cell value) { meta.emplace_back(std::move(key), std::move(value)); }
};

enum class Format { csv, json };

Format parse_format(std::string_view text);

// 17 significant digits; non-finite values print as nan / inf / -inf.
std::string format_double(double value);

/// CSV: `# key=value` and `# warning: ...` comment lines, a header row, then
/// one line per row. JSON: {"meta": {...}, "warnings": [...], "columns": [...],
/// "rows": [{column: value}, ...]} with non-finite numbers as null.
void write_table(const Table& table, Format format, std::ostream& out);

} // namespace qphase

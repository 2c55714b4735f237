#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace bivex {

/// One output cell: numbers are formatted with 17 significant digits so
/// values round-trip exactly through text.
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, bool, std::string>;

std::string format_cell(const Cell& c);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    void write_csv(std::ostream& os) const;
    void write_json(std::ostream& os) const;
};

enum class OutputFormat { Csv, Json };

/// Writes to `path`, or to stdout when path is empty.
void write_table(const Table& t, OutputFormat format, const std::string& path);

}  // namespace bivex

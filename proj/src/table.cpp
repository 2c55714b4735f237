#include "bivex/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace bivex {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string format_cell(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return "";
    if (const double* d = std::get_if<double>(&c)) return format_double(*d);
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const std::uint64_t* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
    if (const bool* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return std::get<std::string>(c);
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != header.size())
        throw std::logic_error("Table: row width does not match header");
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
    for (size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << csv_escape(header[i]);
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << csv_escape(format_cell(row[i]));
        os << "\n";
    }
}

void Table::write_json(std::ostream& os) const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj;
        for (size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (std::holds_alternative<std::monostate>(c))
                obj[header[i]] = nullptr;
            else if (const double* d = std::get_if<double>(&c)) {
                if (std::isfinite(*d))
                    obj[header[i]] = *d;
                else
                    obj[header[i]] = format_double(*d);  // inf/nan as strings
            } else if (const std::int64_t* v = std::get_if<std::int64_t>(&c))
                obj[header[i]] = *v;
            else if (const std::uint64_t* v = std::get_if<std::uint64_t>(&c))
                obj[header[i]] = *v;
            else if (const bool* b = std::get_if<bool>(&c))
                obj[header[i]] = *b;
            else
                obj[header[i]] = std::get<std::string>(c);
        }
        arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << "\n";
}

void write_table(const Table& t, OutputFormat format, const std::string& path) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!path.empty()) {
        file.open(path);
        if (!file) throw std::runtime_error("cannot open output file: " + path);
        os = &file;
    }
    if (format == OutputFormat::Csv)
        t.write_csv(*os);
    else
        t.write_json(*os);
}

}  // namespace bivex

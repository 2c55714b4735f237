#include <doctest.h>

#include <sstream>

#include "bivex/table.hpp"

using namespace bivex;

TEST_CASE("doubles round-trip through the text format") {
    double v = 0.1234567890123456789;
    std::string s = format_cell(Cell{v});
    CHECK(std::stod(s) == v);
    CHECK(format_cell(Cell{std::int64_t{-42}}) == "-42");
    CHECK(format_cell(Cell{true}) == "true");
    CHECK(format_cell(Cell{}) == "");
}

TEST_CASE("csv quoting follows RFC 4180") {
    Table t;
    t.header = {"name", "value"};
    t.add_row({std::string("plain"), 1.5});
    t.add_row({std::string("has,comma"), 2.0});
    t.add_row({std::string("has\"quote"), 3.0});
    std::ostringstream os;
    t.write_csv(os);
    std::string out = os.str();
    CHECK(out.find("\"has,comma\"") != std::string::npos);
    CHECK(out.find("\"has\"\"quote\"") != std::string::npos);
    CHECK(out.find("plain,1.5") != std::string::npos);
}

TEST_CASE("json output is an array of objects with the header names") {
    Table t;
    t.header = {"x", "flag"};
    t.add_row({2.5, false});
    std::ostringstream os;
    t.write_json(os);
    std::string out = os.str();
    CHECK(out.find("\"x\": 2.5") != std::string::npos);
    CHECK(out.find("\"flag\": false") != std::string::npos);
    CHECK(out.front() == '[');
}

TEST_CASE("output is byte-stable across repeated writes") {
    Table t;
    t.header = {"a", "b"};
    t.add_row({1.0 / 3.0, std::uint64_t{7}});
    std::ostringstream first, second;
    t.write_csv(first);
    t.write_csv(second);
    CHECK(first.str() == second.str());
}

TEST_CASE("row width is enforced") {
    Table t;
    t.header = {"a", "b"};
    CHECK_THROWS_AS(t.add_row({1.0}), std::logic_error);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bivex/table.hpp"

namespace bivex::verify {

struct Row {
    std::string criterion;
    std::string params;
    double expected = 0.0;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    /// Analysis predicts this pinned target cannot be met at desk scale; the
    /// row still runs and reports honestly, and the companion convergence
    /// rows must pass. An expected-fail row failing *outside* its predicted
    /// band is treated as an unexpected failure.
    bool expected_fail = false;
    std::string note;
};

struct Options {
    std::vector<std::string> criteria;  // empty = all of C1..C10
    std::uint64_t seed = 20250808;
    int workers = 0;
};

struct Report {
    std::vector<Row> rows;

    bool all_pass() const;
    /// True when every failing row was an expected-fail inside its band.
    bool acceptable() const;
    std::size_t fail_count(bool include_expected) const;
};

Report run(const Options& options);
Table to_table(const Report& report);

}  // namespace bivex::verify

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace abreu {

struct RunOptions {
    std::string command;     // solve | continue | oracle | compare | diagnose | selftest
    std::string config_path; // unused by selftest
    std::string out_dir = ".";
    std::optional<int> grid_override;
    std::optional<std::uint64_t> seed_override;
    std::string field_path; // optional input for diagnose
};

/// Dispatch one run. Exit codes: 0 success, 2 config error, 3 solver not
/// converged (artifacts still written), 4 selftest failure.
int run(const RunOptions& opt, std::ostream& log);

/// Built-in battery of the bite-sized checks; returns the failure count and
/// writes one line per check.
int selftest(std::ostream& out);

} // namespace abreu

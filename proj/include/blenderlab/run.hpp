#pragma once

// Batch front-end: reads a command's input JSON, dispatches to the modules,
// writes a JSON report or a CSV table. Exit codes: 0 = report written
// (property failures are report content, not process failures), 2 = schema
// error, 3 = domain error; diagnostics go to stderr as single-line JSON.

#include <cstdint>
#include <string>

namespace blenderlab::cli {

struct RunConfig {
    std::string command;
    std::string input_path;
    std::string output_path;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string tolerance_overrides;  // JSON object text, may be empty
};

int run(const RunConfig& config);

}  // namespace blenderlab::cli

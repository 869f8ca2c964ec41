#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blenderlab {

// Domain error with a stable machine-readable code ("UnitModulus",
// "EmptyStrip", ...). The CLI maps these to exit status 3 and emits the
// code on the diagnostic stream.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Input that does not parse against a command schema. Exit status 2.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& detail)
        : std::runtime_error("SchemaError: " + detail) {}
};

}  // namespace blenderlab

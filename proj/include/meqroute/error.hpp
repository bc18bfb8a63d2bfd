#pragma once

#include <stdexcept>
#include <string>

namespace meq {

enum class ErrorKind {
    validation,   // malformed input, broken invariant
    infeasible,   // no feasible flow / unreachable destination
    io,           // file system failure
    internal,     // solver diagnostic that should not occur on valid input
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace meq

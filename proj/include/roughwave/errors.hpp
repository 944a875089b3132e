#pragma once

#include <stdexcept>
#include <string>

namespace roughwave {

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested scale lies outside what the grid resolves.
struct ScaleRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace roughwave

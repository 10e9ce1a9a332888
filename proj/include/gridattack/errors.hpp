#pragma once

#include <stdexcept>
#include <string>

namespace gridattack {

// Error hierarchy shared by the library and the CLI.
// CLI exit codes: ConfigError -> 1, ParseError -> 2, SolverError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

}  // namespace gridattack

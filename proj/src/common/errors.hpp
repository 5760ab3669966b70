#pragma once

#include <stdexcept>
#include <string>

namespace scop {

// Error taxonomy shared by every module; the C boundary maps each type to a
// status code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct NotFoundError : Error {
    using Error::Error;
};

struct StateError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace scop

#ifndef AUTOTUNE_ERRORS_HPP
#define AUTOTUNE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace autotune {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a definition file (space, campaign) cannot be parsed or
/// violates its schema.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Raised by the optimizer when every distinct configuration of the space
/// has already been asked or evaluated.
class SpaceExhausted : public Error {
public:
    SpaceExhausted() : Error("space exhausted") {}
    using Error::Error;
};

} // namespace autotune

#endif

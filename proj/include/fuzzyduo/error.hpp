#pragma once

#include <stdexcept>
#include <string>

namespace fuzzyduo {

// Base of every error the library throws. The CLI maps subclasses onto exit
// codes: validation failures exit 2, numeric/runtime failures exit 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidLabel : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Runtime failures (exit code 3).
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace fuzzyduo

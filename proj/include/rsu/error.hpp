#pragma once

#include <stdexcept>
#include <string>

namespace rsu {

// Malformed input document (syntax, missing keys, wrong types).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Run configuration that cannot be executed.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rsu

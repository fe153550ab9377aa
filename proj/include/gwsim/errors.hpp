#pragma once

#include <stdexcept>
#include <string>

namespace gwsim {

/// Invalid parameters or an invariant violated by user-supplied configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument outside the domain of an operation (e.g. preference input).
class InputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed file content; the message carries the location.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed file whose content breaks a structural invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation called in a state where it is not allowed.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gwsim

#pragma once

#include <stdexcept>
#include <string>

namespace fraudtree {

// Bad input data, bad configuration, schema mismatches. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failures. CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fraudtree

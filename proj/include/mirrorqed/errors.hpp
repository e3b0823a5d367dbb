#pragma once

#include <stdexcept>
#include <string>

namespace mirrorqed {

// Exit-code contract used by the CLI: schema 2, numerical regime 3, I/O 4.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameters outside the validity regime of a method, or an integrator
// accuracy check failing (trace drift, norm growth, control singularity).
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mirrorqed

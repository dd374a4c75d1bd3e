#pragma once

#include <stdexcept>
#include <string>

namespace tomo {

/// Invalid configuration, geometry, or dimension mismatch. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Out-of-bounds region or index. Treated as a configuration problem (exit code 2).
class BoundsError : public ConfigError {
public:
    explicit BoundsError(const std::string& what) : ConfigError(what) {}
};

/// Iterative solver diverged or failed to converge within its cap. CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or truncated file. CLI exit code 4.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tomo

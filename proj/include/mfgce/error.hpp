#pragma once

#include <stdexcept>
#include <string>

namespace mfgce {

/// Base error. `module()` names the component that raised it so that
/// the CLI can report provenance in its error record.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class InvalidArgument : public Error {
public:
    InvalidArgument(std::string module, const std::string& what)
        : Error(std::move(module), what) {}
};

class SolverError : public Error {
public:
    SolverError(const std::string& what) : Error("stopping", what) {}
};

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t path, std::size_t step)
        : Error("simulate", what), path_(path), step_(step) {}

    std::size_t path() const noexcept { return path_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t path_;
    std::size_t step_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = -1, int column = -1)
        : Error("config", what), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace mfgce

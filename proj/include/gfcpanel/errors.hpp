#pragma once

#include <stdexcept>
#include <string>

namespace gfcpanel {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// CSV / long-format ingestion problems; message carries the offending row number.
struct IngestionError : Error {
    using Error::Error;
};

// Equation design construction problems (unknown variable, empty sample, ...).
struct DesignError : Error {
    using Error::Error;
};

// Estimation failures: rank-deficient regressors, too few instruments, ...
struct EstimationError : Error {
    using Error::Error;
};

// Not enough observations for a statistic (sample sd, correlation, AR test, ...).
struct InsufficientDataError : Error {
    using Error::Error;
};

// Run configuration problems.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem problems when writing artifacts.
struct IoError : Error {
    using Error::Error;
};

} // namespace gfcpanel

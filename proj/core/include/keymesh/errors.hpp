#pragma once

#include <stdexcept>
#include <string>

namespace keymesh {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent experiment parameters (bad config file, T >= N,
// position outside the deployment area, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tag ids are 1-based; 0 or negative group numbers have no hash-chain value.
class InvalidTagIdError : public Error {
public:
    using Error::Error;
};

// A protocol operation was invoked in the wrong lifecycle stage
// (e.g. generating a key ring twice).
class InvalidStageError : public Error {
public:
    using Error::Error;
};

// A planner equation has no root inside the admissible bracket.
class PlannerInfeasibleError : public Error {
public:
    using Error::Error;
};

// A metric's denominator is empty (e.g. no radio-neighbor pairs exist).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace keymesh

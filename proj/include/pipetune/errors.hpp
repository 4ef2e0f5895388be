#pragma once

#include <stdexcept>
#include <string>

namespace pipetune {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class NonFiniteObservation : public Error {
public:
    explicit NonFiniteObservation(const std::string& what) : Error(what) {}
};

class EmptySampleSet : public Error {
public:
    explicit EmptySampleSet(const std::string& what) : Error(what) {}
};

class MissingWeight : public Error {
public:
    explicit MissingWeight(const std::string& what) : Error(what) {}
};

class UntrainedStage : public Error {
public:
    explicit UntrainedStage(const std::string& what) : Error(what) {}
};

class EmptyActionSet : public Error {
public:
    explicit EmptyActionSet(const std::string& what) : Error(what) {}
};

class InvalidGenerator : public Error {
public:
    explicit InvalidGenerator(const std::string& what) : Error(what) {}
};

class IncompleteTrace : public Error {
public:
    explicit IncompleteTrace(const std::string& what) : Error(what) {}
};

// Raised when an experiment config file is malformed. The CLI maps this
// to exit code 2; every other Error maps to exit code 1.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace pipetune

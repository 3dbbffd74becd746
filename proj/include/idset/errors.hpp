#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idset {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

/// No grid point satisfies the support predicate. Sections are required to be
/// nonempty, so this always points at a truncation or resolution problem.
class EmptySection : public Error {
public:
    explicit EmptySection(const std::string& what, std::size_t atom = npos)
        : Error(what), atom_(atom) {}
    const char* kind() const noexcept override { return "EmptySection"; }
    std::size_t atom() const noexcept { return atom_; }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t atom_;
};

class DimensionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DimensionError"; }
};

class NonFiniteMoment : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NonFiniteMoment"; }
};

class NumericalInstability : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NumericalInstability"; }
};

class EmptyInterval : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "EmptyInterval"; }
};

class RatioDegenerate : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "RatioDegenerate"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ConfigError"; }
};

class NotSupported : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NotSupported"; }
};

class NonemptyCorrespondenceViolated : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NonemptyCorrespondenceViolated"; }
};

}  // namespace idset

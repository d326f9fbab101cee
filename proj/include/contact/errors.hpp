#pragma once

#include <stdexcept>
#include <string>

namespace contact {

// Base of every error the library throws on purpose. The CLI maps subclasses
// to exit codes, so keep the hierarchy flat and descriptive.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class PotentialOverflowsBox : public Error {
public:
    using Error::Error;
};

class SupportEscapesBox : public Error {
public:
    using Error::Error;
};

class UnresolvedBump : public Error {
public:
    using Error::Error;
};

class SingularAtOrigin : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class SameBlockRequested : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double residual)
        : Error(what + " did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

class ShiftTooCloseToSpectrum : public Error {
public:
    using Error::Error;
};

class AboveThreshold : public Error {
public:
    AboveThreshold(double z, double z0)
        : Error("spectral point z = " + std::to_string(z) + " is not below the threshold z0 = " +
                std::to_string(z0)),
          z_(z), z0_(z0) {}
    double z() const { return z_; }
    double z0() const { return z0_; }

private:
    double z_, z0_;
};

class SeriesDiverging : public Error {
public:
    SeriesDiverging(double ratio)
        : Error("Neumann series ratio " + std::to_string(ratio) + " is not below 1"), ratio_(ratio) {}
    double ratio() const { return ratio_; }

private:
    double ratio_;
};

} // namespace contact

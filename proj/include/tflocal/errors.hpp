#pragma once

#include <stdexcept>
#include <string>

namespace tflocal {

// Quadrature or iterative refinement stopped above its target tolerance.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double achieved, double target)
        : std::runtime_error(what + " (achieved " + std::to_string(achieved) +
                             ", target " + std::to_string(target) + ")"),
          achieved_(achieved), target_(target) {}
    double achieved() const noexcept { return achieved_; }
    double target() const noexcept { return target_; }

private:
    double achieved_;
    double target_;
};

// Time-frequency grid spacing too coarse for the requested operation.
class GridTooCoarse : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested basis index sits inside the truncation guard band.
class TruncationRisk : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All probed eigenvalues are numerically zero; nothing to invert.
class DegenerateSpectrum : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scalar root finder could not bracket a sign change.
class RootNotBracketed : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least-squares model fit ended above its acceptance threshold.
class FitFailure : public std::runtime_error {
public:
    FitFailure(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Dense eigensolver reported failure.
class SolverFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scalar argument outside the documented range of an inversion.
class OutOfRange : public std::domain_error {
    using std::domain_error::domain_error;
};

// Signal with vanishing norm where a normalized quantity is required.
class ZeroSignal : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tflocal

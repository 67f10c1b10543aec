#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace qkac {

/// Absolute tolerances shared by every module. All are configurable from the CLI
/// through `--tol <name>=<value>`.
struct Tolerances {
    double herm = 1e-10;       // Hermiticity residual (max entry of A - A*)
    double trace = 1e-10;      // |Tr rho - 1|
    double psd = 1e-9;         // minimum eigenvalue floor; also the support threshold
    double eig_one = 1e-8;     // eigenvalue-1 threshold for fixed spaces and null spaces
    double tail = 1e-12;       // Poisson tail mass in uniformization
    double picard = 1e-6;      // mild-form verifier agreement
    double unitary = 1e-10;    // unitarity / commutation residuals in collision specs

    /// Sets a tolerance by name; throws std::invalid_argument for unknown names.
    void set(const std::string& name, double value);
    std::map<std::string, double> as_map() const;
};

/// Default guard on the Hilbert-space dimension d^N.
inline constexpr std::size_t kDefaultMaxDim = 4096;

/// Raised when input data violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical contract (positivity, trace, convergence) is broken
/// during a computation.
class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qkac

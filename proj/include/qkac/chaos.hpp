#pragma once

// McKean hierarchy operators and propagation-of-chaos experiments.
// Factor indices are 0-based: Gamma_k pairs each of factors 0..k-1 with factor k.

#include <vector>

#include "qkac/collisions.hpp"

namespace qkac {

/// Gamma_k(B) = 2 sum_{i<k} (Q_{i,k} - 1)(B (x) 1), B on H^{(x)k}
OperatorMatrix gamma_k(const Superoperator& q, const OperatorMatrix& b, std::size_t k, std::size_t d);

/// G_k(B) = 2/(N-1) sum_{i<j<k} (Q_ij - 1)(B) (x) 1 + (N-k)/(N-1) Gamma_k(B)
OperatorMatrix g_k(const Superoperator& q, const OperatorMatrix& b, std::size_t k, std::size_t n, std::size_t d);

/// Residual (max-abs) of the twisted derivation identity
/// Gamma_k(X (x) Y) = [U_pi (Gamma_j X (x) 1) U_pi*] (1 (x) Y (x) 1) + X (x) Gamma_{k-j} Y,
/// with X on j factors, Y on k-j factors and pi the transposition of factors j and k.
double derivation_check(const Superoperator& q, const OperatorMatrix& x, std::size_t j, const OperatorMatrix& y,
                        std::size_t m, std::size_t d);

struct ChaosRow {
    std::size_t n;
    double t;
    double delta1;        // |rho_N(t)^(1) - rho(t)|_1
    double delta2;        // |rho_N(t)^(2) - rho(t) (x) rho(t)|_1
    double entropy_n;     // S(rho_N(t)^(1))
    double entropy_qkbe;  // S(rho(t))
};

struct ChaosExperiment {
    const CollisionSpec* spec;
    DensityMatrix rho0;
    std::vector<std::size_t> n_list;
    std::vector<double> t_grid;  // starts at 0
    std::size_t max_dim = kDefaultMaxDim;
};

std::vector<ChaosRow> run_chaos_experiment(const ChaosExperiment& exp, const Tolerances& tol = {});

}  // namespace qkac

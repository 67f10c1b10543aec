#pragma once

// The N-particle Kac generator L_N = N (Q_N - 1) and its semigroup.

#include <vector>

#include "qkac/collisions.hpp"

namespace qkac {

/// Applies a two-particle channel q to factors (i, j) of an operator on H^{(x)N}.
OperatorMatrix apply_pair_channel(const Superoperator& q, const OperatorMatrix& x, std::size_t i, std::size_t j,
                                  const FactorShape& shape);

class KacGenerator {
public:
    KacGenerator(const CollisionSpec& spec, std::size_t n, std::size_t max_dim = kDefaultMaxDim);

    const CollisionSpec& spec() const { return spec_; }
    const Superoperator& q() const { return q_; }
    const FactorShape& shape() const { return shape_; }
    std::size_t num_particles() const { return shape_.num_factors(); }
    std::size_t dim() const { return shape_.total_dim(); }

    OperatorMatrix apply_pair(std::size_t i, std::size_t j, const OperatorMatrix& x) const;
    /// binom(N,2)^{-1} sum_{i<j} Q_ij X
    OperatorMatrix apply_QN(const OperatorMatrix& x) const;
    DensityMatrix apply_QN(const DensityMatrix& rho) const;
    /// N (Q_N X - X)
    OperatorMatrix apply_LN(const OperatorMatrix& x) const;

private:
    CollisionSpec spec_;
    Superoperator q_;
    FactorShape shape_;
};

struct EvolveStats {
    std::size_t terms = 0;       // Poisson terms summed
    double tail_mass = 0.0;      // neglected Poisson mass
    double trace_drift = 0.0;    // |Tr - 1| before renormalization
};

/// e^{t L_N} rho0 by uniformization; throws ContractViolation when the result
/// leaves the PSD cone by more than tol.psd.
DensityMatrix evolve_master(const KacGenerator& gen, const DensityMatrix& rho0, double t, const Tolerances& tol = {},
                            EvolveStats* stats = nullptr);

/// HS-orthonormal basis of ker L_N, assembled from the invariant diagonal
/// shell blocks X_{E,E}.
std::vector<OperatorMatrix> master_null_space(const KacGenerator& gen, const Tolerances& tol = {});

struct SteadyStates {
    std::vector<DensityMatrix> states;  // P_c / rank(P_c)
    std::size_t class_count = 0;
    std::size_t null_space_dim = 0;
    bool ergodic = false;
};

SteadyStates steady_states_basis(const KacGenerator& gen, const Tolerances& tol = {});

struct EntropyProduction {
    double value = 0.0;             // D_N
    double relative_entropy = 0.0;  // S(rho || rho_inf)
    double ratio = 0.0;             // NaN when the relative entropy is at or below tol.psd
};

/// D_N(rho) = -Tr[L_N rho (log rho - log rho_inf)] with rho_inf the commutant projection.
EntropyProduction entropy_production(const KacGenerator& gen, const DensityMatrix& rho, const Tolerances& tol = {});

struct CovarianceReport {
    double generator = 0.0;  // |Q_N(U X U*) - U (Q_N X) U*|
    double symmetric = 0.0;  // |Q_N(U X U*) - Q_N X|, zero for symmetric X
    double pair = 0.0;       // |U*(Q_ij (U X U*)) U - Q_{pi(i) pi(j)} X|
};

/// Residuals in max-abs entry norm; U = U_pi.
CovarianceReport permutation_covariance_check(const KacGenerator& gen, const OperatorMatrix& x,
                                              std::span<const std::size_t> pi, std::size_t i = 0, std::size_t j = 1);

}  // namespace qkac

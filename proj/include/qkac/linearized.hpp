#pragma once

// BKM geometry at a strictly positive steady state and the linearized QKBE operator.

#include "qkac/boltzmann.hpp"

namespace qkac {

/// [rho] A = int_0^1 rho^s A rho^{1-s} ds, realised in the eigenbasis of rho as the
/// Schur multiplier L_ij = (l_i - l_j) / (log l_i - log l_j), L_ii = l_i.
class BKMGeometry {
public:
    explicit BKMGeometry(const DensityMatrix& rho, const Tolerances& tol = {});

    const DensityMatrix& rho() const { return rho_; }
    std::size_t dim() const { return rho_.dim(); }
    const RealVector& eigenvalues() const { return eig_.values; }
    const RealMatrix& multipliers() const { return mult_; }

    /// [rho] A
    OperatorMatrix multiply(const OperatorMatrix& a) const;
    /// [rho]^{-1} A
    OperatorMatrix divide(const OperatorMatrix& a) const;

private:
    DensityMatrix rho_;
    HermitianEigen eig_;
    RealMatrix mult_;
};

/// Logarithmic mean (a - b) / (log a - log b), with a == b mapped to a.
double logarithmic_mean(double a, double b);

/// Tr[A* [rho] B]
cplx bkm_inner(const BKMGeometry& geo, const OperatorMatrix& a, const OperatorMatrix& b);

OperatorMatrix multiply_super(const BKMGeometry& geo, const OperatorMatrix& a);
OperatorMatrix divide_super(const BKMGeometry& geo, const OperatorMatrix& a);

/// Linearized QKBE operator on the tangent direction X (rho = [rho_inf](1 + X)):
/// K X = 2([rho]^{-1}[rho * ([rho]X') + ([rho]X') * rho] - X') with X' = X - Tr[rho X] 1.
Superoperator build_K(const Superoperator& q, const BKMGeometry& geo);

/// Independent route: K X = 2 [rho]^{-1} Tr_2([rho (x) rho](Q XX - XX)), XX = X (x) 1 + 1 (x) X.
Superoperator build_K_alternate(const Superoperator& q, const BKMGeometry& geo);

/// |rho * rho - rho|_1 at the geometry's base point.
double steady_residual(const Superoperator& q, const BKMGeometry& geo);

/// -1/2 sum_k w_k Tr[(BB - U BB U*)* [rho (x) rho] (AA - U AA U*)] over the spec's node
/// family; equals <B, K A>_BKM. Throws ValidationError when the spec has no nodes.
cplx dirichlet_form(const CollisionSpec& spec, const BKMGeometry& geo, const OperatorMatrix& a,
                    const OperatorMatrix& b);

struct GapResult {
    double gap = 0.0;
    std::size_t kernel_dim = 0;
    std::size_t invariant_count = 0;
    RealVector spectrum;  // generalized eigenvalues of -K on the invariant complement, ascending
};

/// Smallest eigenvalue of -K in the BKM metric on the BKM-orthogonal complement of
/// the collision invariants, over Hermitian operators.
GapResult spectral_gap(const Superoperator& q, const SingleParticleModel& model, const BKMGeometry& geo,
                       const Tolerances& tol = {});

}  // namespace qkac

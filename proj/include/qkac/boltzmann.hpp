#pragma once

// Wild convolution, the quantum Kac-Boltzmann equation d rho/dt = 2 (rho * rho - rho),
// its steady states and collision invariants.

#include <vector>

#include "qkac/collisions.hpp"

namespace qkac {

/// A * B = Tr_2 Q(A (x) B)
OperatorMatrix wild(const Superoperator& q, const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix wild(const CollisionSpec& spec, const OperatorMatrix& a, const OperatorMatrix& b);

/// Wild convolution for the channel X -> sum_E Tr[P_E X] sigma_E, evaluated from
/// the diagonals of A and B and the shell multiplicities.
OperatorMatrix wild_diagonal(const SingleParticleModel& model, const OperatorMatrix& a, const OperatorMatrix& b);

/// Keeps the diagonal in the eigenbasis of h.
OperatorMatrix diagonal_projection(const SingleParticleModel& model, const OperatorMatrix& a);

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double max_trace_drift = 0.0;
    /// Mild-form residual, max trace norm over checkpoints; negative when not run.
    double picard_residual = -1.0;
    std::size_t steps = 0;
};

struct QkbeOptions {
    bool picard_check = false;
    std::size_t max_halvings = 20;
};

/// Fixed-step RK4 landing exactly on every checkpoint of t_grid (which must start
/// at 0 and increase). A PSD violation halves the step for the failing segment.
Trajectory qkbe_integrate(const Superoperator& q, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                          const Tolerances& tol = {}, const QkbeOptions& opt = {});

struct SteadyStateFamily {
    std::vector<Energy> levels;  // distinct energies
    /// Columns span {x : x_a + x_b = x_c + x_e whenever eps_a + eps_b = eps_c + eps_e};
    /// the first two columns are the constant and the energy vector.
    RealMatrix basis;
    std::size_t relation_count = 0;

    std::size_t dimension() const { return std::size_t(basis.cols()); }
};

SteadyStateFamily classify_steady_states(const SingleParticleModel& model);

/// exp(sum_k c_k f_k(h)) normalized to unit trace.
DensityMatrix steady_state(const SingleParticleModel& model, const SteadyStateFamily& family,
                           const std::vector<double>& coefficients);

/// |rho * rho - rho|_1 <= tol
bool is_steady(const Superoperator& q, const DensityMatrix& rho, double tol);

/// f(h) for every basis column f.
std::vector<OperatorMatrix> collision_invariants_basis(const SingleParticleModel& model);

/// max_t |Tr[A rho(t)] - Tr[A rho(0)]|
double conserved_check(const Trajectory& traj, const OperatorMatrix& a);

DensityMatrix gibbs(const SingleParticleModel& model, double beta);

}  // namespace qkac

#pragma once

// Single-particle spectra, N-particle energy shells and their adjacency classes.

#include <cstdint>
#include <map>
#include <vector>

#include "qkac/operators.hpp"

namespace qkac {

using Energy = std::int64_t;

/// h = diag(e_0, ..., e_{d-1}) with exact integer levels, sorted ascending.
class SingleParticleModel {
public:
    explicit SingleParticleModel(std::vector<Energy> energies);

    std::size_t dim() const { return energies_.size(); }
    const std::vector<Energy>& energies() const { return energies_; }
    Energy energy(std::size_t j) const { return energies_[j]; }

    /// Distinct levels, ascending.
    std::vector<Energy> distinct_energies() const;

    OperatorMatrix hamiltonian() const;
    /// H_2 = h (x) 1 + 1 (x) h
    OperatorMatrix pair_hamiltonian() const;

private:
    std::vector<Energy> energies_;
};

struct Shell {
    Energy energy;
    std::vector<std::size_t> indices;  // flat multi-indices, ascending
};

/// Shells of H_N = sum_k h_k, ordered by energy.
std::vector<Shell> shell_decomposition(const SingleParticleModel& model, std::size_t n,
                                       std::size_t max_dim = kDefaultMaxDim);

OperatorMatrix shell_projector(const SingleParticleModel& model, std::size_t n, Energy e,
                               std::size_t max_dim = kDefaultMaxDim);
DensityMatrix shell_state(const SingleParticleModel& model, std::size_t n, Energy e,
                          std::size_t max_dim = kDefaultMaxDim);

using OccupancyVector = std::vector<std::size_t>;

OccupancyVector occupancy(std::span<const std::size_t> alpha, std::size_t d);

struct EnergyShellPartition {
    Energy energy;
    std::vector<std::size_t> indices;
    std::vector<std::vector<std::size_t>> classes;           // flat multi-indices per class
    std::vector<std::vector<OccupancyVector>> class_occupancies;

    std::size_t class_count() const { return classes.size(); }
};

/// Adjacency classes on one shell, computed over occupancy vectors.
EnergyShellPartition classify_shell(const SingleParticleModel& model, std::size_t n, Energy e,
                                    std::size_t max_dim = kDefaultMaxDim);

/// All shells classified, ordered by energy.
std::vector<EnergyShellPartition> classify_all(const SingleParticleModel& model, std::size_t n,
                                               std::size_t max_dim = kDefaultMaxDim);

struct ErgodicityReport {
    bool fully_ergodic = true;
    struct Row {
        Energy energy;
        std::size_t dim;
        std::size_t class_count;
        std::size_t occupancy_count;
    };
    std::vector<Row> shells;
    /// Some shell holds more than one occupancy vector, i.e. distinct level
    /// configurations share an energy at this N.
    bool accidental_degeneracy = false;
};

ErgodicityReport is_fully_ergodic(const SingleParticleModel& model, std::size_t n,
                                  std::size_t max_dim = kDefaultMaxDim);

/// Normalized class projections P_c / rank(P_c) over all shells.
std::vector<DensityMatrix> class_states(const SingleParticleModel& model, std::size_t n,
                                        std::size_t max_dim = kDefaultMaxDim);

/// sum_c Tr[P_c X] / rank(P_c) * P_c
OperatorMatrix commutant_projection(const SingleParticleModel& model, std::size_t n, const OperatorMatrix& x,
                                    std::size_t max_dim = kDefaultMaxDim);
DensityMatrix commutant_projection(const SingleParticleModel& model, std::size_t n, const DensityMatrix& rho,
                                   std::size_t max_dim = kDefaultMaxDim);

}  // namespace qkac

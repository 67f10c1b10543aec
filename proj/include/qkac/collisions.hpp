#pragma once

// Collision specifications and the two-particle collision channel Q.

#include <optional>
#include <string>
#include <vector>

#include "qkac/spectra.hpp"
#include "qkac/superoperator.hpp"

namespace qkac {

struct CollisionNode {
    OperatorMatrix unitary;  // on H (x) H, internal ordering
    double weight;
};

class CollisionSpec {
public:
    enum class Kind { Sampled, ClosedForm };

    /// Sampled spec. Nodes are merged when equal and the weighted set is closed
    /// under U -> U* and U -> S U S (S = swap) by orbit averaging; weights are
    /// renormalized to 1.
    static CollisionSpec make_sampled(std::string name, SingleParticleModel model, std::vector<CollisionNode> nodes);

    /// Closed-form channel; `nodes` optionally carries a finite node family whose
    /// average equals the channel (used by the Dirichlet form).
    static CollisionSpec make_closed_form(std::string name, SingleParticleModel model, Superoperator channel,
                                          std::vector<CollisionNode> nodes = {});

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const SingleParticleModel& model() const { return model_; }
    const std::vector<CollisionNode>& nodes() const { return nodes_; }
    bool has_nodes() const { return !nodes_.empty(); }
    const std::optional<Superoperator>& channel() const { return channel_; }

private:
    CollisionSpec(std::string name, SingleParticleModel model) : name_(std::move(name)), model_(std::move(model)) {}

    Kind kind_ = Kind::Sampled;
    std::string name_;
    SingleParticleModel model_;
    std::vector<CollisionNode> nodes_;
    std::optional<Superoperator> channel_;
};

struct SpecViolation {
    std::string axiom;
    double residual;
    std::string detail;
};

struct SpecReport {
    bool passes = true;
    std::vector<SpecViolation> violations;
};

SpecReport verify_spec(const CollisionSpec& spec, const Tolerances& tol = {});

/// Q A = sum_k w_k U_k A U_k* (sampled) or the stored closed-form channel.
Superoperator build_Q(const CollisionSpec& spec);

/// Average of the node conjugations, regardless of the spec kind.
Superoperator nodes_channel(const std::vector<CollisionNode>& nodes, std::size_t dim);

/// Reorders a 4x4 matrix given in the basis |00>,|10>,|01>,|11> into internal ordering
/// (the map is an involution, so it also converts back).
OperatorMatrix swapped_basis_to_internal(const OperatorMatrix& a);

/// Qubit with h = diag(0, 1).
SingleParticleModel qubit_model();

/// Uniform qubit channel: diagonal in the pair basis, averaging |01>,|10>.
CollisionSpec qubit_uniform_spec();
/// Tilted qubit channel with off-diagonal factors 1/8, 1/4, 1/2.
CollisionSpec qubit_tilted_spec();

/// Torus-grid surrogates with n points per angle. The tilted grid drops the
/// zero-weight nodes at angle pi.
CollisionSpec qubit_uniform_sampled(std::size_t points_per_angle = 16);
CollisionSpec qubit_tilted_sampled(std::size_t points_per_angle = 16);

/// Node unitary at angles (eta, theta, psi, phi), internal ordering.
OperatorMatrix qubit_node_unitary(double eta, double theta, double psi, double phi);

/// Conditional expectation X -> sum_E Tr[P_E X] sigma_E onto functions of H_2.
CollisionSpec exact_EA2_spec(const SingleParticleModel& model);

/// Orthonormal (Hilbert-Schmidt) basis of the eigenvalue-1 space of a
/// self-adjoint channel.
std::vector<OperatorMatrix> fixed_space_of_Q(const Superoperator& q, const Tolerances& tol = {});

/// The fixed space of Q coincides with span{P_E}.
bool is_ergodic(const CollisionSpec& spec, const Tolerances& tol = {});

/// Reads {"dim": d, "nodes": [{"weight": w, "unitary": [[re, im], ...]}]} with
/// unitaries row-major on H (x) H (internal ordering); d must match the model.
CollisionSpec load_sampled_file(const std::string& path, const SingleParticleModel& model);

}  // namespace qkac

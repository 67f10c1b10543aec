#include "qkac/collisions.hpp"

#include <cmath>
#include <fstream>
#include <array>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace qkac {

namespace {

using Key = std::vector<long long>;

Key node_key(const OperatorMatrix& u) {
    Key k;
    k.reserve(2 * u.dim() * u.dim());
    for (std::size_t i = 0; i < u.dim(); ++i)
        for (std::size_t j = 0; j < u.dim(); ++j) {
            k.push_back(std::llround(u(i, j).real() * 1e8));
            k.push_back(std::llround(u(i, j).imag() * 1e8));
        }
    return k;
}

// Nodes merged by rounded value; find() falls back to a tolerance scan on a key miss.
class NodeTable {
public:
    explicit NodeTable(double tol) : tol_(tol) {}

    std::size_t insert(const OperatorMatrix& u, double weight) {
        if (auto it = index_.find(node_key(u)); it != index_.end()) {
            weights_[it->second] += weight;
            return it->second;
        }
        index_.emplace(node_key(u), unitaries_.size());
        unitaries_.push_back(u);
        weights_.push_back(weight);
        return unitaries_.size() - 1;
    }

    std::optional<std::size_t> find(const OperatorMatrix& u) const {
        if (auto it = index_.find(node_key(u)); it != index_.end()) return it->second;
        for (std::size_t k = 0; k < unitaries_.size(); ++k)
            if (max_abs(unitaries_[k] - u) <= tol_) return k;
        return std::nullopt;
    }

    std::size_t size() const { return unitaries_.size(); }
    const OperatorMatrix& unitary(std::size_t k) const { return unitaries_[k]; }
    double weight(std::size_t k) const { return weights_[k]; }

private:
    double tol_;
    std::map<Key, std::size_t> index_;
    std::vector<OperatorMatrix> unitaries_;
    std::vector<double> weights_;
};

OperatorMatrix swap_unitary(std::size_t d) {
    const std::vector<std::size_t> pi{1, 0};
    return permutation_unitary(pi, FactorShape(2, d));
}

}  // namespace

CollisionSpec CollisionSpec::make_sampled(std::string name, SingleParticleModel model, std::vector<CollisionNode> nodes) {
    const std::size_t d2 = model.dim() * model.dim();
    if (nodes.empty()) throw ValidationError("sampled spec '" + name + "' has no nodes");
    for (const auto& n : nodes) {
        if (n.unitary.dim() != d2) throw ValidationError("sampled spec '" + name + "': node is not on H (x) H");
        if (!(n.weight >= 0.0) || !std::isfinite(n.weight))
            throw ValidationError("sampled spec '" + name + "': weights must be non-negative");
    }

    NodeTable table(1e-9);
    for (const auto& n : nodes)
        if (n.weight > 0.0) table.insert(n.unitary, n.weight);
    if (table.size() == 0) throw ValidationError("sampled spec '" + name + "': all weights are zero");

    const OperatorMatrix s = swap_unitary(model.dim());
    const std::size_t base = table.size();
    std::vector<std::array<std::size_t, 4>> orbit(base);
    for (std::size_t k = 0; k < base; ++k) {
        const OperatorMatrix u = table.unitary(k);
        const OperatorMatrix ua = u.adjoint();
        orbit[k] = {k, table.insert(ua, 0.0), table.insert(s * u * s, 0.0), table.insert(s * ua * s, 0.0)};
    }
    // group average over {1, adjoint, swap, swap o adjoint}; orbit entries may repeat
    std::vector<double> averaged(table.size(), 0.0);
    for (std::size_t k = 0; k < base; ++k) {
        double w = 0.0;
        for (std::size_t m : orbit[k]) w += table.weight(m);
        for (std::size_t m : orbit[k]) averaged[m] = w / 4.0;
    }

    CollisionSpec spec(std::move(name), std::move(model));
    spec.kind_ = Kind::Sampled;
    double total = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) total += averaged[k];
    for (std::size_t k = 0; k < table.size(); ++k)
        if (averaged[k] > 0.0) spec.nodes_.push_back({table.unitary(k), averaged[k] / total});
    return spec;
}

CollisionSpec CollisionSpec::make_closed_form(std::string name, SingleParticleModel model, Superoperator channel,
                                              std::vector<CollisionNode> nodes) {
    if (channel.dim() != model.dim() * model.dim())
        throw ValidationError("closed-form spec '" + name + "': channel is not on B(H (x) H)");
    CollisionSpec spec(std::move(name), std::move(model));
    spec.kind_ = Kind::ClosedForm;
    spec.channel_ = std::move(channel);
    spec.nodes_ = std::move(nodes);
    return spec;
}

SpecReport verify_spec(const CollisionSpec& spec, const Tolerances& tol) {
    SpecReport report;
    auto fail = [&](std::string axiom, double residual, std::string detail) {
        report.passes = false;
        report.violations.push_back({std::move(axiom), residual, std::move(detail)});
    };

    if (spec.kind() == CollisionSpec::Kind::ClosedForm) {
        const Superoperator& q = *spec.channel();
        if (double r = q.trace_preservation_residual(); r > tol.unitary) fail("trace-preserving", r, "");
        if (double r = q.unitality_residual(); r > tol.unitary) fail("unital", r, "");
        if (double r = q.hermiticity_residual(); r > tol.unitary) fail("hermiticity-preserving", r, "");
        if (double r = q.self_adjoint_residual(); r > tol.unitary) fail("self-adjoint", r, "");
        if (double r = q.choi_min_eigenvalue(); r < -tol.psd) fail("completely-positive", -r, "negative Choi eigenvalue");
        return report;
    }

    const OperatorMatrix h2 = spec.model().pair_hamiltonian();
    const std::size_t d2 = h2.dim();
    const OperatorMatrix id = OperatorMatrix::identity(d2);
    double worst_unitary = 0.0, worst_commute = 0.0;
    bool has_identity = false;
    for (const auto& n : spec.nodes()) {
        worst_unitary = std::max(worst_unitary, max_abs(n.unitary * n.unitary.adjoint() - id));
        worst_commute = std::max(worst_commute, max_abs(commutator(n.unitary, h2)));
        if (max_abs(n.unitary - id) <= tol.unitary) has_identity = true;
    }
    if (worst_unitary > tol.unitary) fail("unitary", worst_unitary, "max |U U* - 1|");
    if (worst_commute > tol.unitary) fail("(i) commutes with H_2", worst_commute, "max |[U, H_2]|");
    if (!has_identity) fail("(ii) identity node", 1.0, "no node equals the identity");

    NodeTable table(1e-9);
    for (const auto& n : spec.nodes()) table.insert(n.unitary, n.weight);
    const OperatorMatrix s = swap_unitary(spec.model().dim());
    double worst_adj = 0.0, worst_swap = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        const OperatorMatrix& u = table.unitary(k);
        auto weight_of = [&](const OperatorMatrix& v) {
            auto m = table.find(v);
            return m ? table.weight(*m) : 0.0;
        };
        worst_adj = std::max(worst_adj, std::abs(weight_of(u.adjoint()) - table.weight(k)));
        worst_swap = std::max(worst_swap, std::abs(weight_of(s * u * s) - table.weight(k)));
    }
    if (worst_adj > tol.unitary) fail("(iii) closed under adjoint", worst_adj, "weight mismatch");
    if (worst_swap > tol.unitary) fail("(iv) closed under swap", worst_swap, "weight mismatch");

    double total = 0.0;
    for (const auto& n : spec.nodes()) total += n.weight;
    if (std::abs(total - 1.0) > tol.unitary) fail("probability measure", std::abs(total - 1.0), "weights do not sum to 1");
    return report;
}

Superoperator nodes_channel(const std::vector<CollisionNode>& nodes, std::size_t dim) {
    Matrix acc = Matrix::Zero(Eigen::Index(dim * dim), Eigen::Index(dim * dim));
    for (const auto& n : nodes) {
        const Matrix& u = n.unitary.mat();
        const Matrix uc = u.conjugate();
        for (Eigen::Index i = 0; i < u.rows(); ++i)
            for (Eigen::Index j = 0; j < u.cols(); ++j)
                acc.block(i * Eigen::Index(dim), j * Eigen::Index(dim), Eigen::Index(dim), Eigen::Index(dim)) +=
                    (n.weight * u(i, j)) * uc;
    }
    return Superoperator(std::move(acc), dim);
}

Superoperator build_Q(const CollisionSpec& spec) {
    if (spec.kind() == CollisionSpec::Kind::ClosedForm) return *spec.channel();
    return nodes_channel(spec.nodes(), spec.model().dim() * spec.model().dim());
}

OperatorMatrix swapped_basis_to_internal(const OperatorMatrix& a) {
    if (a.dim() != 4) throw ValidationError("swapped basis adapter needs a 4x4 matrix");
    static constexpr std::size_t p[4] = {0, 2, 1, 3};
    OperatorMatrix out(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) out(p[i], p[j]) = a(i, j);
    return out;
}

SingleParticleModel qubit_model() { return SingleParticleModel({0, 1}); }

namespace {

// Entrywise channel in the swapped basis, 0-based: factors f(i,j) on off-diagonal entries,
// the two middle diagonal entries replaced by their average.
Superoperator qubit_entrywise(const double factors[4][4]) {
    auto swapped_map = [&](const OperatorMatrix& a) {
        OperatorMatrix out(4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if (i != j) out(i, j) = factors[i][j] * a(i, j);
        const cplx mid = 0.5 * (a(1, 1) + a(2, 2));
        out(0, 0) = a(0, 0);
        out(1, 1) = mid;
        out(2, 2) = mid;
        out(3, 3) = a(3, 3);
        return out;
    };
    return Superoperator::from_action(
        4, [&](const OperatorMatrix& x) { return swapped_basis_to_internal(swapped_map(swapped_basis_to_internal(x))); });
}

std::vector<CollisionNode> qubit_grid(std::size_t n, bool tilted) {
    std::vector<double> angle, weight;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * double(k) / double(n);
        const double w = tilted ? 1.0 + std::cos(a) : 1.0;
        if (w < 1e-14) continue;
        angle.push_back(a);
        weight.push_back(w);
    }
    std::vector<CollisionNode> nodes;
    for (std::size_t a = 0; a < angle.size(); ++a)
        for (std::size_t b = 0; b < angle.size(); ++b)
            for (std::size_t c = 0; c < angle.size(); ++c)
                for (std::size_t e = 0; e < angle.size(); ++e)
                    nodes.push_back({qubit_node_unitary(angle[a], angle[b], angle[c], angle[e]),
                                     weight[a] * weight[b] * weight[c] * weight[e]});
    return nodes;
}

}  // namespace

OperatorMatrix qubit_node_unitary(double eta, double theta, double psi, double phi) {
    const cplx i(0.0, 1.0);
    OperatorMatrix u(4);
    u(0, 0) = std::exp(i * eta);
    u(1, 1) = std::exp(i * psi) * std::cos(theta);
    u(1, 2) = -std::exp(i * phi) * std::sin(theta);
    u(2, 1) = std::exp(-i * phi) * std::sin(theta);
    u(2, 2) = std::exp(-i * psi) * std::cos(theta);
    u(3, 3) = 1.0;
    return swapped_basis_to_internal(u);
}

CollisionSpec qubit_uniform_spec() {
    const double f[4][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
    return CollisionSpec::make_closed_form("qubit_uniform", qubit_model(), qubit_entrywise(f),
                                           qubit_uniform_sampled(8).nodes());
}

CollisionSpec qubit_tilted_spec() {
    const double f[4][4] = {{0, 0.125, 0.125, 0.5}, {0.125, 0, 0, 0.25}, {0.125, 0, 0, 0.25}, {0.5, 0.25, 0.25, 0}};
    return CollisionSpec::make_closed_form("qubit_tilted", qubit_model(), qubit_entrywise(f),
                                           qubit_tilted_sampled(8).nodes());
}

CollisionSpec qubit_uniform_sampled(std::size_t points_per_angle) {
    if (points_per_angle < 2) throw ValidationError("grid needs at least two points per angle");
    return CollisionSpec::make_sampled("qubit_uniform_sampled", qubit_model(), qubit_grid(points_per_angle, false));
}

CollisionSpec qubit_tilted_sampled(std::size_t points_per_angle) {
    if (points_per_angle < 2) throw ValidationError("grid needs at least two points per angle");
    return CollisionSpec::make_sampled("qubit_tilted_sampled", qubit_model(), qubit_grid(points_per_angle, true));
}

CollisionSpec exact_EA2_spec(const SingleParticleModel& model) {
    const auto shells = shell_decomposition(model, 2);
    const std::size_t d2 = model.dim() * model.dim();
    auto ea2 = [&](const OperatorMatrix& x) {
        OperatorMatrix out(d2);
        for (const auto& s : shells) {
            cplx t = 0.0;
            for (std::size_t f : s.indices) t += x(f, f);
            t /= double(s.indices.size());
            for (std::size_t f : s.indices) out(f, f) = t;
        }
        return out;
    };
    return CollisionSpec::make_closed_form("exact_ea2", model, Superoperator::from_action(d2, ea2));
}

std::vector<OperatorMatrix> fixed_space_of_Q(const Superoperator& q, const Tolerances& tol) {
    if (double r = q.self_adjoint_residual(); r > 1e-8) {
        std::ostringstream os;
        os << "fixed_space_of_Q: channel is not self-adjoint (residual " << r << ")";
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q.mat() + q.mat().adjoint()));
    std::vector<OperatorMatrix> out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (std::abs(es.eigenvalues()(k) - 1.0) <= tol.eig_one) out.push_back(unvec(es.eigenvectors().col(k), q.dim()));
    return out;
}

bool is_ergodic(const CollisionSpec& spec, const Tolerances& tol) {
    const auto fixed = fixed_space_of_Q(build_Q(spec), tol);
    const auto shells = shell_decomposition(spec.model(), 2);
    if (fixed.size() != shells.size()) return false;
    const std::size_t d2 = spec.model().dim() * spec.model().dim();
    for (const auto& s : shells) {
        OperatorMatrix p(d2);
        for (std::size_t f : s.indices) p(f, f) = 1.0;
        OperatorMatrix rest = p;
        for (const auto& f : fixed) rest -= f * hs_inner(f, p);
        if (hs_norm(rest) > 1e-6) return false;
    }
    return true;
}

CollisionSpec load_sampled_file(const std::string& path, const SingleParticleModel& model) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sampled spec file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("sampled spec file '" + path + "': " + e.what());
    }
    try {
        const std::size_t d = j.at("dim").get<std::size_t>();
        if (d != model.dim()) throw ValidationError("sampled spec file: dim does not match the model");
        const std::size_t d2 = d * d;
        std::vector<CollisionNode> nodes;
        for (const auto& node : j.at("nodes")) {
            const auto& entries = node.at("unitary");
            if (entries.size() != d2 * d2) throw ValidationError("sampled spec file: unitary has the wrong size");
            OperatorMatrix u(d2);
            for (std::size_t k = 0; k < d2 * d2; ++k)
                u(k / d2, k % d2) = cplx(entries[k].at(0).get<double>(), entries[k].at(1).get<double>());
            nodes.push_back({std::move(u), node.at("weight").get<double>()});
        }
        return CollisionSpec::make_sampled("sampled_file:" + path, model, std::move(nodes));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("sampled spec file '" + path + "': " + e.what());
    }
}

}  // namespace qkac

#include "qkac/master.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qkac {

namespace {

// index[r * d^2 + p] = flat index whose (i, j) digits form p = a_i d + a_j and
// whose remaining digits form r
std::vector<std::size_t> pair_index_table(std::size_t i, std::size_t j, const FactorShape& shape) {
    const std::size_t n = shape.num_factors();
    const std::size_t d = shape.factor_dim();
    if (i >= n || j >= n || i == j) throw ValidationError("pair channel: factor index out of range");
    std::vector<std::size_t> index(shape.total_dim());
    for (std::size_t a = 0; a < shape.total_dim(); ++a) {
        const auto alpha = shape.digits(a);
        std::size_t r = 0;
        for (std::size_t f = 0; f < n; ++f)
            if (f != i && f != j) r = r * d + alpha[f];
        index[r * d * d + alpha[i] * d + alpha[j]] = a;
    }
    return index;
}

OperatorMatrix apply_with_table(const Superoperator& q, const OperatorMatrix& x, const std::vector<std::size_t>& index,
                                std::size_t d2) {
    const std::size_t rest = index.size() / d2;
    const Eigen::Index cols = Eigen::Index(rest * rest);
    Matrix gathered(Eigen::Index(d2 * d2), cols);
    for (std::size_t r = 0; r < rest; ++r)
        for (std::size_t c = 0; c < rest; ++c) {
            const Eigen::Index col = Eigen::Index(r * rest + c);
            for (std::size_t p = 0; p < d2; ++p)
                for (std::size_t s = 0; s < d2; ++s)
                    gathered(Eigen::Index(p * d2 + s), col) = x(index[r * d2 + p], index[c * d2 + s]);
        }
    const Matrix mapped = q.mat() * gathered;
    OperatorMatrix out(x.dim());
    for (std::size_t r = 0; r < rest; ++r)
        for (std::size_t c = 0; c < rest; ++c) {
            const Eigen::Index col = Eigen::Index(r * rest + c);
            for (std::size_t p = 0; p < d2; ++p)
                for (std::size_t s = 0; s < d2; ++s)
                    out(index[r * d2 + p], index[c * d2 + s]) = mapped(Eigen::Index(p * d2 + s), col);
        }
    return out;
}

}  // namespace

OperatorMatrix apply_pair_channel(const Superoperator& q, const OperatorMatrix& x, std::size_t i, std::size_t j,
                                  const FactorShape& shape) {
    const std::size_t d2 = shape.factor_dim() * shape.factor_dim();
    if (q.dim() != d2) throw ValidationError("pair channel: channel does not act on H (x) H");
    if (x.dim() != shape.total_dim()) throw ValidationError("pair channel: operator dimension mismatch");
    return apply_with_table(q, x, pair_index_table(i, j, shape), d2);
}

KacGenerator::KacGenerator(const CollisionSpec& spec, std::size_t n, std::size_t max_dim)
    : spec_(spec), q_(build_Q(spec)), shape_(n, spec.model().dim(), max_dim) {
    if (n < 2) throw ValidationError("Kac generator needs N >= 2");
}

OperatorMatrix KacGenerator::apply_pair(std::size_t i, std::size_t j, const OperatorMatrix& x) const {
    return apply_pair_channel(q_, x, i, j, shape_);
}

OperatorMatrix KacGenerator::apply_QN(const OperatorMatrix& x) const {
    if (x.dim() != dim()) throw ValidationError("apply_QN: dimension mismatch");
    const std::size_t n = num_particles();
    OperatorMatrix acc(dim());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) acc += apply_pair(i, j, x);
    acc *= cplx(2.0 / double(n * (n - 1)));
    return acc;
}

DensityMatrix KacGenerator::apply_QN(const DensityMatrix& rho) const {
    OperatorMatrix out = apply_QN(rho.op());
    out = (out + out.adjoint()) * cplx(0.5);
    return DensityMatrix(std::move(out));
}

OperatorMatrix KacGenerator::apply_LN(const OperatorMatrix& x) const {
    return (apply_QN(x) - x) * cplx(double(num_particles()));
}

DensityMatrix evolve_master(const KacGenerator& gen, const DensityMatrix& rho0, double t, const Tolerances& tol,
                            EvolveStats* stats) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("evolve_master: t must be finite and >= 0");
    if (rho0.dim() != gen.dim()) throw ValidationError("evolve_master: dimension mismatch");
    EvolveStats local;
    if (t == 0.0) {
        if (stats) *stats = local;
        return rho0;
    }
    const double lambda = double(gen.num_particles()) * t;
    const std::size_t cap = std::size_t(lambda + 40.0 * std::sqrt(lambda) + 200.0);

    OperatorMatrix term = rho0.op();
    OperatorMatrix acc(gen.dim());
    double mass = 0.0;
    std::size_t k = 0;
    for (;; ++k) {
        const double w = std::exp(-lambda + double(k) * std::log(lambda) - std::lgamma(double(k) + 1.0));
        acc += term * cplx(w);
        mass += w;
        if ((double(k) >= lambda && 1.0 - mass <= tol.tail) || k >= cap) break;
        term = gen.apply_QN(term);
    }
    local.terms = k + 1;
    local.tail_mass = std::max(0.0, 1.0 - mass);
    if (local.tail_mass > tol.tail) {
        std::ostringstream os;
        os << "evolve_master: Poisson tail " << local.tail_mass << " above tolerance after " << local.terms << " terms";
        throw ContractViolation(os.str());
    }

    acc = (acc + acc.adjoint()) * cplx(0.5);
    const double tr = acc.trace().real();
    local.trace_drift = std::abs(tr - 1.0);
    acc *= cplx(1.0 / tr);
    if (!acc.is_positive_semidefinite(tol.psd)) throw ContractViolation("evolve_master: state left the PSD cone");
    if (stats) *stats = local;
    return DensityMatrix(std::move(acc), tol);
}

std::vector<OperatorMatrix> master_null_space(const KacGenerator& gen, const Tolerances& tol) {
    const auto shells = shell_decomposition(gen.spec().model(), gen.num_particles(), gen.dim());
    std::vector<OperatorMatrix> out;
    for (const auto& shell : shells) {
        const auto& s = shell.indices;
        const std::size_t m = s.size();
        Matrix block(Eigen::Index(m * m), Eigen::Index(m * m));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) {
                const OperatorMatrix img = gen.apply_QN(OperatorMatrix::unit(gen.dim(), s[a], s[b]));
                for (std::size_t c = 0; c < m; ++c)
                    for (std::size_t e = 0; e < m; ++e)
                        block(Eigen::Index(c * m + e), Eigen::Index(a * m + b)) = img(s[c], s[e]);
            }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.adjoint()));
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            if (std::abs(es.eigenvalues()(k) - 1.0) > tol.eig_one) continue;
            OperatorMatrix x(gen.dim());
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t e = 0; e < m; ++e) x(s[c], s[e]) = es.eigenvectors()(Eigen::Index(c * m + e), k);
            out.push_back(std::move(x));
        }
    }
    return out;
}

SteadyStates steady_states_basis(const KacGenerator& gen, const Tolerances& tol) {
    SteadyStates out;
    out.ergodic = is_ergodic(gen.spec(), tol);
    out.states = class_states(gen.spec().model(), gen.num_particles(), gen.dim());
    out.class_count = out.states.size();
    out.null_space_dim = master_null_space(gen, tol).size();
    return out;
}

EntropyProduction entropy_production(const KacGenerator& gen, const DensityMatrix& rho, const Tolerances& tol) {
    if (rho.dim() != gen.dim()) throw ValidationError("entropy_production: dimension mismatch");
    const auto eig = hermitian_eigen(rho.op());
    if (eig.values.minCoeff() <= tol.psd)
        throw ValidationError("entropy_production: rho must have full support");
    const DensityMatrix rho_inf =
        commutant_projection(gen.spec().model(), gen.num_particles(), rho, gen.dim());
    const OperatorMatrix diff = hermitian_log(rho.op()) - hermitian_log(rho_inf.op());
    EntropyProduction out;
    out.value = -(gen.apply_LN(rho.op()) * diff).trace().real();
    out.relative_entropy = relative_entropy(rho, rho_inf, tol);
    out.ratio = out.relative_entropy > tol.psd ? out.value / out.relative_entropy
                                               : std::numeric_limits<double>::quiet_NaN();
    return out;
}

CovarianceReport permutation_covariance_check(const KacGenerator& gen, const OperatorMatrix& x,
                                              std::span<const std::size_t> pi, std::size_t i, std::size_t j) {
    const FactorShape& shape = gen.shape();
    if (x.dim() != gen.dim()) throw ValidationError("permutation_covariance_check: dimension mismatch");
    if (i >= shape.num_factors() || j >= shape.num_factors() || i == j)
        throw ValidationError("permutation_covariance_check: pair index out of range");
    const OperatorMatrix u = permutation_unitary(pi, shape);
    const OperatorMatrix moved = u * x * u.adjoint();
    const OperatorMatrix qn_moved = gen.apply_QN(moved);
    const OperatorMatrix qn_x = gen.apply_QN(x);

    CovarianceReport r;
    r.generator = max_abs(qn_moved - u * qn_x * u.adjoint());
    r.symmetric = max_abs(qn_moved - qn_x);
    r.pair = max_abs(u.adjoint() * gen.apply_pair(i, j, moved) * u - gen.apply_pair(pi[i], pi[j], x));
    return r;
}

}  // namespace qkac

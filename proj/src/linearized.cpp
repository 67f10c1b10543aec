#include "qkac/linearized.hpp"

#include <cmath>
#include <sstream>

namespace qkac {

double logarithmic_mean(double a, double b) {
    const double la = std::log(a), lb = std::log(b);
    if (std::abs(la - lb) < 1e-6) return 0.5 * (a + b);
    return (a - b) / (la - lb);
}

BKMGeometry::BKMGeometry(const DensityMatrix& rho, const Tolerances& tol) : rho_(rho), eig_(hermitian_eigen(rho.op())) {
    if (eig_.values.minCoeff() <= tol.psd)
        throw ValidationError("BKM geometry needs a strictly positive state");
    const Eigen::Index n = eig_.values.size();
    mult_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            mult_(i, j) = i == j ? eig_.values(i) : logarithmic_mean(eig_.values(i), eig_.values(j));
}

OperatorMatrix BKMGeometry::multiply(const OperatorMatrix& a) const {
    if (a.dim() != dim()) throw ValidationError("BKM multiply: dimension mismatch");
    const Matrix inner = eig_.vectors.adjoint() * a.mat() * eig_.vectors;
    const Matrix scaled = inner.cwiseProduct(mult_.cast<cplx>());
    return OperatorMatrix(Matrix(eig_.vectors * scaled * eig_.vectors.adjoint()));
}

OperatorMatrix BKMGeometry::divide(const OperatorMatrix& a) const {
    if (a.dim() != dim()) throw ValidationError("BKM divide: dimension mismatch");
    const Matrix inner = eig_.vectors.adjoint() * a.mat() * eig_.vectors;
    const Matrix scaled = inner.cwiseQuotient(mult_.cast<cplx>());
    return OperatorMatrix(Matrix(eig_.vectors * scaled * eig_.vectors.adjoint()));
}

cplx bkm_inner(const BKMGeometry& geo, const OperatorMatrix& a, const OperatorMatrix& b) {
    return hs_inner(a, geo.multiply(b));
}

OperatorMatrix multiply_super(const BKMGeometry& geo, const OperatorMatrix& a) { return geo.multiply(a); }
OperatorMatrix divide_super(const BKMGeometry& geo, const OperatorMatrix& a) { return geo.divide(a); }

double steady_residual(const Superoperator& q, const BKMGeometry& geo) {
    const OperatorMatrix& r = geo.rho().op();
    return trace_norm(wild(q, r, r) - r);
}

namespace {

void require_steady(const Superoperator& q, const BKMGeometry& geo) {
    if (double res = steady_residual(q, geo); res > 1e-8) {
        std::ostringstream os;
        os << "linearization point is not steady (residual " << res << ")";
        throw ValidationError(os.str());
    }
}

}  // namespace

Superoperator build_K(const Superoperator& q, const BKMGeometry& geo) {
    require_steady(q, geo);
    const OperatorMatrix& rho = geo.rho().op();
    const std::size_t d = geo.dim();
    const OperatorMatrix id = OperatorMatrix::identity(d);
    return Superoperator::from_action(d, [&](const OperatorMatrix& x) {
        const OperatorMatrix xt = x - id * (rho * x).trace();
        const OperatorMatrix y = geo.multiply(xt);
        return (geo.divide(wild(q, rho, y) + wild(q, y, rho)) - xt) * cplx(2.0);
    });
}

Superoperator build_K_alternate(const Superoperator& q, const BKMGeometry& geo) {
    require_steady(q, geo);
    const std::size_t d = geo.dim();
    const BKMGeometry pair(DensityMatrix(tensor(geo.rho().op(), geo.rho().op())));
    const OperatorMatrix id = OperatorMatrix::identity(d);
    const FactorShape two(2, d);
    return Superoperator::from_action(d, [&](const OperatorMatrix& x) {
        const OperatorMatrix xx = tensor(x, id) + tensor(id, x);
        const OperatorMatrix inner = pair.multiply(q.apply(xx) - xx);
        return geo.divide(partial_trace(inner, two, std::size_t{1})) * cplx(2.0);
    });
}

cplx dirichlet_form(const CollisionSpec& spec, const BKMGeometry& geo, const OperatorMatrix& a,
                    const OperatorMatrix& b) {
    if (!spec.has_nodes())
        throw ValidationError("dirichlet_form: spec '" + spec.name() + "' has no node family");
    const std::size_t d = geo.dim();
    const OperatorMatrix id = OperatorMatrix::identity(d);
    const BKMGeometry pair(DensityMatrix(tensor(geo.rho().op(), geo.rho().op())));
    const OperatorMatrix aa = tensor(a, id) + tensor(id, a);
    const OperatorMatrix bb = tensor(b, id) + tensor(id, b);
    cplx acc = 0.0;
    for (const auto& node : spec.nodes()) {
        const OperatorMatrix& u = node.unitary;
        const OperatorMatrix da = aa - u * aa * u.adjoint();
        const OperatorMatrix db = bb - u * bb * u.adjoint();
        acc += node.weight * hs_inner(db, pair.multiply(da));
    }
    return -0.5 * acc;
}

namespace {

// HS-orthonormal real basis of the Hermitian d x d matrices.
std::vector<OperatorMatrix> hermitian_basis(std::size_t d) {
    std::vector<OperatorMatrix> out;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < d; ++i) out.push_back(OperatorMatrix::unit(d, i, i));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            OperatorMatrix re(d), im(d);
            re(i, j) = s;
            re(j, i) = s;
            im(i, j) = cplx(0.0, -s);
            im(j, i) = cplx(0.0, s);
            out.push_back(re);
            out.push_back(im);
        }
    return out;
}

}  // namespace

GapResult spectral_gap(const Superoperator& q, const SingleParticleModel& model, const BKMGeometry& geo,
                       const Tolerances& tol) {
    if (model.dim() != geo.dim()) throw ValidationError("spectral_gap: model and state dimensions differ");
    const Superoperator k = build_K(q, geo);
    const auto basis = hermitian_basis(geo.dim());
    const Eigen::Index n = Eigen::Index(basis.size());

    RealMatrix g(n, n), m(n, n);
    std::vector<OperatorMatrix> k_basis;
    for (const auto& e : basis) k_basis.push_back(k.apply(e));
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            g(a, b) = bkm_inner(geo, basis[a], basis[b]).real();
            m(a, b) = -bkm_inner(geo, basis[a], k_basis[b]).real();
        }
    g = 0.5 * (g + g.transpose());
    m = 0.5 * (m + m.transpose());

    GapResult out;
    {
        Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> full(m, g);
        if (full.info() != Eigen::Success) throw ValidationError("spectral_gap: degenerate BKM Gram matrix");
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(full.eigenvalues()(i)) <= tol.eig_one) ++out.kernel_dim;
    }

    const auto invariants = collision_invariants_basis(model);
    out.invariant_count = invariants.size();
    RealMatrix c(n, Eigen::Index(invariants.size()));
    for (std::size_t j = 0; j < invariants.size(); ++j)
        for (Eigen::Index a = 0; a < n; ++a) c(a, Eigen::Index(j)) = hs_inner_real(basis[a], invariants[j]);

    // BKM-orthogonal complement: {x : c^T g x = 0}
    const RealMatrix constraint = c.transpose() * g;
    Eigen::JacobiSVD<RealMatrix> svd(constraint, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    const RealMatrix z = svd.matrixV().rightCols(n - rank);
    if (z.cols() == 0) throw ValidationError("spectral_gap: complement of the collision invariants is empty");

    const RealMatrix gz = z.transpose() * g * z;
    const RealMatrix mz = z.transpose() * m * z;
    Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> red(0.5 * (mz + mz.transpose()), 0.5 * (gz + gz.transpose()));
    if (red.info() != Eigen::Success) throw ValidationError("spectral_gap: degenerate BKM Gram matrix");
    out.spectrum = red.eigenvalues();
    out.gap = out.spectrum(0);
    return out;
}

}  // namespace qkac

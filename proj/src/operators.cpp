#include "qkac/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qkac {

void Tolerances::set(const std::string& name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError("tolerance '" + name + "' must be a positive finite number");
    }
    if (name == "herm") herm = value;
    else if (name == "trace") trace = value;
    else if (name == "psd") psd = value;
    else if (name == "eig_one") eig_one = value;
    else if (name == "tail") tail = value;
    else if (name == "picard") picard = value;
    else if (name == "unitary") unitary = value;
    else throw ValidationError("unknown tolerance '" + name + "'");
}

std::map<std::string, double> Tolerances::as_map() const {
    return {{"herm", herm},       {"trace", trace}, {"psd", psd},         {"eig_one", eig_one},
            {"tail", tail},       {"picard", picard}, {"unitary", unitary}};
}

// ---------------------------------------------------------------------------

OperatorMatrix::OperatorMatrix(std::size_t dim) : m_(Matrix::Zero(Eigen::Index(dim), Eigen::Index(dim))) {}

OperatorMatrix::OperatorMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw ValidationError("operator matrix must be square");
}

OperatorMatrix OperatorMatrix::identity(std::size_t dim) {
    return OperatorMatrix(Matrix(Matrix::Identity(Eigen::Index(dim), Eigen::Index(dim))));
}

OperatorMatrix OperatorMatrix::zero(std::size_t dim) { return OperatorMatrix(dim); }

OperatorMatrix OperatorMatrix::unit(std::size_t dim, std::size_t i, std::size_t j) {
    OperatorMatrix e(dim);
    e(i, j) = 1.0;
    return e;
}

OperatorMatrix OperatorMatrix::diagonal(std::span<const double> values) {
    OperatorMatrix e(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) e(k, k) = values[k];
    return e;
}

bool OperatorMatrix::is_hermitian(double tol) const {
    if (m_.size() == 0) return true;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool OperatorMatrix::is_unitary(double tol) const {
    const Matrix id = Matrix::Identity(m_.rows(), m_.cols());
    return (m_ * m_.adjoint() - id).cwiseAbs().maxCoeff() <= tol;
}

bool OperatorMatrix::is_positive_semidefinite(double tol) const {
    if (!is_hermitian(std::max(tol, 1e-8))) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& o) {
    m_ += o.m_;
    return *this;
}
OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& o) {
    m_ -= o.m_;
    return *this;
}
OperatorMatrix& OperatorMatrix::operator*=(cplx s) {
    m_ *= s;
    return *this;
}

// ---------------------------------------------------------------------------

FactorShape::FactorShape(std::size_t num_factors, std::size_t factor_dim, std::size_t max_dim)
    : n_(num_factors), d_(factor_dim), total_(1) {
    if (n_ < 1) throw ValidationError("FactorShape: need at least one factor");
    if (d_ < 1) throw ValidationError("FactorShape: factor dimension must be positive");
    for (std::size_t k = 0; k < n_; ++k) {
        if (total_ > max_dim / d_) {
            std::ostringstream os;
            os << "dimension " << d_ << "^" << n_ << " exceeds the size guard " << max_dim;
            throw ValidationError(os.str());
        }
        total_ *= d_;
    }
}

std::vector<std::size_t> FactorShape::digits(std::size_t flat) const {
    std::vector<std::size_t> out(n_);
    for (std::size_t k = n_; k-- > 0;) {
        out[k] = flat % d_;
        flat /= d_;
    }
    return out;
}

std::size_t FactorShape::flat(std::span<const std::size_t> digits) const {
    std::size_t f = 0;
    for (std::size_t a : digits) f = f * d_ + a;
    return f;
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(OperatorMatrix op, const Tolerances& tol) : op_(std::move(op)) {
    if (!op_.is_hermitian(tol.herm)) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(op_.trace() - cplx(1.0)) > tol.trace) {
        std::ostringstream os;
        os << "density matrix trace " << op_.trace().real() << " differs from 1";
        throw ValidationError(os.str());
    }
    if (!op_.is_positive_semidefinite(tol.psd)) throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    return DensityMatrix(OperatorMatrix::identity(dim) * cplx(1.0 / double(dim)));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    const Vector u = psi / psi.norm();
    return DensityMatrix(OperatorMatrix(Matrix(u * u.adjoint())));
}

// ---------------------------------------------------------------------------

HermitianEigen hermitian_eigen(const OperatorMatrix& a, double herm_tol) {
    if (!a.is_hermitian(herm_tol)) throw ValidationError("matrix function requires a Hermitian argument");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a.mat() + a.mat().adjoint()));
    return {es.eigenvalues(), es.eigenvectors()};
}

OperatorMatrix hermitian_function(const OperatorMatrix& a, const std::function<double(double)>& f,
                                  double herm_tol) {
    const auto eig = hermitian_eigen(a, herm_tol);
    Vector fv(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) fv(k) = f(eig.values(k));
    return OperatorMatrix(Matrix(eig.vectors * fv.asDiagonal() * eig.vectors.adjoint()));
}

OperatorMatrix hermitian_log(const OperatorMatrix& a, double herm_tol) {
    return hermitian_function(
        a,
        [](double x) {
            if (!(x > 0.0)) throw ValidationError("logarithm of a non-positive eigenvalue");
            return std::log(x);
        },
        herm_tol);
}

OperatorMatrix hermitian_exp(const OperatorMatrix& a, double herm_tol) {
    return hermitian_function(a, [](double x) { return std::exp(x); }, herm_tol);
}

OperatorMatrix hermitian_power(const OperatorMatrix& a, double s, double herm_tol) {
    return hermitian_function(a, [s](double x) { return x > 0.0 ? std::pow(x, s) : 0.0; }, herm_tol);
}

// ---------------------------------------------------------------------------

OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
    const Eigen::Index da = a.mat().rows();
    const Eigen::Index db = b.mat().rows();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.mat()(i, j) * b.mat();
    return OperatorMatrix(std::move(out));
}

OperatorMatrix tensor_power(const OperatorMatrix& a, std::size_t n) {
    if (n == 0) return OperatorMatrix::identity(1);
    OperatorMatrix out = a;
    for (std::size_t k = 1; k < n; ++k) out = tensor(out, a);
    return out;
}

namespace {

void check_permutation(std::span<const std::size_t> pi, std::size_t n) {
    if (pi.size() != n) throw ValidationError("permutation length does not match the number of factors");
    std::vector<bool> seen(n, false);
    for (std::size_t v : pi) {
        if (v >= n || seen[v]) throw ValidationError("invalid permutation");
        seen[v] = true;
    }
}

}  // namespace

std::vector<std::size_t> permutation_index_map(std::span<const std::size_t> pi, const FactorShape& shape) {
    const std::size_t n = shape.num_factors();
    check_permutation(pi, n);
    std::vector<std::size_t> map(shape.total_dim());
    std::vector<std::size_t> image(n);
    for (std::size_t a = 0; a < shape.total_dim(); ++a) {
        const auto alpha = shape.digits(a);
        for (std::size_t m = 0; m < n; ++m) image[m] = alpha[pi[m]];
        map[a] = shape.flat(image);
    }
    return map;
}

OperatorMatrix permutation_unitary(std::span<const std::size_t> pi, const FactorShape& shape) {
    const auto map = permutation_index_map(pi, shape);
    OperatorMatrix u(shape.total_dim());
    for (std::size_t a = 0; a < map.size(); ++a) u(map[a], a) = 1.0;
    return u;
}

OperatorMatrix permute_factors(const OperatorMatrix& x, std::span<const std::size_t> pi, const FactorShape& shape) {
    if (x.dim() != shape.total_dim()) throw ValidationError("permute_factors: dimension mismatch");
    const auto map = permutation_index_map(pi, shape);
    OperatorMatrix out(x.dim());
    for (std::size_t a = 0; a < map.size(); ++a)
        for (std::size_t b = 0; b < map.size(); ++b) out(map[a], map[b]) = x(a, b);
    return out;
}

OperatorMatrix embed_pair(const OperatorMatrix& a2, std::size_t i, std::size_t j, const FactorShape& shape) {
    const std::size_t n = shape.num_factors();
    const std::size_t d = shape.factor_dim();
    if (n < 2) throw ValidationError("embed_pair: need at least two factors");
    if (i >= n || j >= n || i == j) throw ValidationError("embed_pair: factor index out of range");
    if (a2.dim() != d * d) throw ValidationError("embed_pair: operator is not on H (x) H");

    // U_pi moves the content of factor p to factor pi^{-1}(p); choose pi(i)=0, pi(j)=1.
    std::vector<std::size_t> pi(n);
    pi[i] = 0;
    pi[j] = 1;
    std::size_t next = 2;
    for (std::size_t m = 0; m < n; ++m)
        if (m != i && m != j) pi[m] = next++;

    const OperatorMatrix front = tensor(a2, OperatorMatrix::identity(shape.total_dim() / (d * d)));
    return permute_factors(front, pi, shape);
}

OperatorMatrix embed_leading(const OperatorMatrix& a, std::size_t k, const FactorShape& shape) {
    const FactorShape lead(k, shape.factor_dim(), shape.total_dim());
    if (k > shape.num_factors() || a.dim() != lead.total_dim())
        throw ValidationError("embed_leading: dimension mismatch");
    return tensor(a, OperatorMatrix::identity(shape.total_dim() / lead.total_dim()));
}

OperatorMatrix partial_trace(const OperatorMatrix& x, const FactorShape& shape, std::span<const std::size_t> keep) {
    if (x.dim() != shape.total_dim()) throw ValidationError("partial_trace: dimension mismatch");
    const std::size_t n = shape.num_factors();
    const std::size_t d = shape.factor_dim();
    std::vector<bool> kept(n, false);
    for (std::size_t f : keep) {
        if (f >= n || kept[f]) throw ValidationError("partial_trace: invalid factor list");
        kept[f] = true;
    }
    std::size_t dk = 1;
    for (std::size_t f = 0; f < n; ++f)
        if (kept[f]) dk *= d;
    const std::size_t dt = shape.total_dim() / dk;

    // flat index of (kept digits, traced digits)
    std::vector<std::size_t> index(shape.total_dim());
    for (std::size_t a = 0; a < shape.total_dim(); ++a) {
        const auto alpha = shape.digits(a);
        std::size_t ik = 0, it = 0;
        for (std::size_t f = 0; f < n; ++f) {
            if (kept[f]) ik = ik * d + alpha[f];
            else it = it * d + alpha[f];
        }
        index[ik * dt + it] = a;
    }
    OperatorMatrix out(dk);
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            cplx s = 0.0;
            for (std::size_t t = 0; t < dt; ++t) s += x(index[r * dt + t], index[c * dt + t]);
            out(r, c) = s;
        }
    return out;
}

OperatorMatrix partial_trace(const OperatorMatrix& x, const FactorShape& shape, std::size_t keep_first) {
    if (keep_first < 1 || keep_first > shape.num_factors())
        throw ValidationError("partial_trace: number of kept factors out of range");
    std::vector<std::size_t> keep(keep_first);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    return partial_trace(x, shape, keep);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const FactorShape& shape, std::size_t keep_first) {
    return DensityMatrix(partial_trace(rho.op(), shape, keep_first));
}

// ---------------------------------------------------------------------------

double von_neumann_entropy(const OperatorMatrix& rho, const Tolerances& tol) {
    const auto eig = hermitian_eigen(rho, std::max(tol.herm, 1e-8));
    double s = 0.0;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double p = eig.values(k);
        if (p > tol.psd) s -= p * std::log(p);
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho, const Tolerances& tol) {
    return von_neumann_entropy(rho.op(), tol);
}

double relative_entropy(const OperatorMatrix& rho, const OperatorMatrix& sigma, const Tolerances& tol) {
    if (rho.dim() != sigma.dim()) throw ValidationError("relative_entropy: dimension mismatch");
    const auto es = hermitian_eigen(sigma, std::max(tol.herm, 1e-8));
    const Matrix rot = es.vectors.adjoint() * rho.mat() * es.vectors;
    double cross = 0.0;
    for (Eigen::Index k = 0; k < es.values.size(); ++k) {
        const double weight = rot(k, k).real();
        if (es.values(k) > tol.psd) cross += weight * std::log(es.values(k));
        else if (weight > tol.psd) return std::numeric_limits<double>::infinity();
    }
    return -von_neumann_entropy(rho, tol) - cross;
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma, const Tolerances& tol) {
    return relative_entropy(rho.op(), sigma.op(), tol);
}

cplx hs_inner(const OperatorMatrix& a, const OperatorMatrix& b) {
    return (a.mat().conjugate().cwiseProduct(b.mat())).sum();
}

double hs_inner_real(const OperatorMatrix& a, const OperatorMatrix& b) { return hs_inner(a, b).real(); }

double hs_norm(const OperatorMatrix& a) { return a.mat().norm(); }

double trace_norm(const OperatorMatrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a.mat());
    return svd.singularValues().sum();
}

double operator_norm(const OperatorMatrix& a) {
    if (a.dim() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a.mat());
    return svd.singularValues()(0);
}

double max_abs(const OperatorMatrix& a) { return a.dim() == 0 ? 0.0 : a.mat().cwiseAbs().maxCoeff(); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) { return a * b - b * a; }

Vector vec(const OperatorMatrix& x) {
    const std::size_t n = x.dim();
    Vector v(Eigen::Index(n * n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v(Eigen::Index(i * n + j)) = x(i, j);
    return v;
}

OperatorMatrix unvec(const Vector& v, std::size_t dim) {
    if (std::size_t(v.size()) != dim * dim) throw ValidationError("unvec: length mismatch");
    OperatorMatrix x(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = v(Eigen::Index(i * dim + j));
    return x;
}

}  // namespace qkac

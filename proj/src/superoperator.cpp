#include "qkac/superoperator.hpp"

namespace qkac {

Superoperator::Superoperator(std::size_t dim)
    : m_(Matrix::Zero(Eigen::Index(dim * dim), Eigen::Index(dim * dim))), dim_(dim) {}

Superoperator::Superoperator(Matrix m, std::size_t dim) : m_(std::move(m)), dim_(dim) {
    if (std::size_t(m_.rows()) != dim * dim || std::size_t(m_.cols()) != dim * dim)
        throw ValidationError("superoperator matrix has the wrong shape");
}

Superoperator Superoperator::identity(std::size_t dim) {
    return Superoperator(Matrix(Matrix::Identity(Eigen::Index(dim * dim), Eigen::Index(dim * dim))), dim);
}

Superoperator Superoperator::conjugation(const OperatorMatrix& u) {
    // vec(U X U*) = (U (x) conj U) vec(X) for row-major vec
    return Superoperator(tensor(u, OperatorMatrix(Matrix(u.mat().conjugate()))).mat(), u.dim());
}

Superoperator Superoperator::from_action(std::size_t dim,
                                         const std::function<OperatorMatrix(const OperatorMatrix&)>& f) {
    Superoperator s(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            const OperatorMatrix img = f(OperatorMatrix::unit(dim, i, j));
            if (img.dim() != dim) throw ValidationError("from_action: map changes the dimension");
            s.m_.col(Eigen::Index(i * dim + j)) = vec(img);
        }
    return s;
}

OperatorMatrix Superoperator::apply(const OperatorMatrix& x) const {
    if (x.dim() != dim_) throw ValidationError("superoperator applied to an operator of the wrong dimension");
    return unvec(m_ * vec(x), dim_);
}

Superoperator Superoperator::adjoint() const { return Superoperator(Matrix(m_.adjoint()), dim_); }

Superoperator& Superoperator::operator+=(const Superoperator& o) {
    m_ += o.m_;
    return *this;
}

Superoperator& Superoperator::operator*=(cplx s) {
    m_ *= s;
    return *this;
}

Superoperator operator*(const Superoperator& a, const Superoperator& b) {
    return Superoperator(Matrix(a.m_ * b.m_), a.dim_);
}

OperatorMatrix Superoperator::choi() const {
    const std::size_t n = dim_;
    OperatorMatrix c(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l)
                    c(i * n + k, j * n + l) = m_(Eigen::Index(k * n + l), Eigen::Index(i * n + j));
    return c;
}

double Superoperator::self_adjoint_residual() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double Superoperator::trace_preservation_residual() const {
    const std::size_t n = dim_;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx t = 0.0;
            for (std::size_t k = 0; k < n; ++k) t += m_(Eigen::Index(k * n + k), Eigen::Index(i * n + j));
            worst = std::max(worst, std::abs(t - cplx(i == j ? 1.0 : 0.0)));
        }
    return worst;
}

double Superoperator::unitality_residual() const {
    return max_abs(apply(OperatorMatrix::identity(dim_)) - OperatorMatrix::identity(dim_));
}

double Superoperator::hermiticity_residual() const {
    const std::size_t n = dim_;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx a = m_(Eigen::Index(k * n + l), Eigen::Index(i * n + j));
                    const cplx b = m_(Eigen::Index(l * n + k), Eigen::Index(j * n + i));
                    worst = std::max(worst, std::abs(a - std::conj(b)));
                }
    return worst;
}

double Superoperator::choi_min_eigenvalue() const {
    const OperatorMatrix c = choi();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c.mat() + c.mat().adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace qkac

#pragma once

// Linear maps on B(H) stored as (dim^2 x dim^2) matrices acting on the
// row-major vectorisation: vec(Phi(X)) = M vec(X).

#include "qkac/operators.hpp"

namespace qkac {

class Superoperator {
public:
    Superoperator() = default;
    explicit Superoperator(std::size_t dim);
    Superoperator(Matrix m, std::size_t dim);

    static Superoperator identity(std::size_t dim);
    /// X -> U X U*
    static Superoperator conjugation(const OperatorMatrix& u);
    /// Assembles the matrix column by column from the action on matrix units.
    static Superoperator from_action(std::size_t dim, const std::function<OperatorMatrix(const OperatorMatrix&)>& f);

    std::size_t dim() const { return dim_; }
    const Matrix& mat() const { return m_; }

    OperatorMatrix apply(const OperatorMatrix& x) const;
    OperatorMatrix operator()(const OperatorMatrix& x) const { return apply(x); }

    /// Adjoint for the Hilbert-Schmidt pairing.
    Superoperator adjoint() const;

    Superoperator& operator+=(const Superoperator& o);
    Superoperator& operator*=(cplx s);
    friend Superoperator operator+(Superoperator a, const Superoperator& b) { return a += b; }
    friend Superoperator operator*(cplx s, Superoperator a) { return a *= s; }
    /// (a * b)(X) = a(b(X))
    friend Superoperator operator*(const Superoperator& a, const Superoperator& b);

    /// Choi matrix sum_ij |i><j| (x) Phi(|i><j|).
    OperatorMatrix choi() const;

    double self_adjoint_residual() const;
    double trace_preservation_residual() const;
    double unitality_residual() const;
    double hermiticity_residual() const;
    /// Minimum Choi eigenvalue.
    double choi_min_eigenvalue() const;

private:
    Matrix m_;
    std::size_t dim_ = 0;
};

}  // namespace qkac

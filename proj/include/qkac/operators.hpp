#pragma once

// Dense complex operators on finite tensor-product spaces.
//
// Basis convention: multi-index (a_0, ..., a_{N-1}) on H^{(x)N} maps to the flat
// index a_0 d^{N-1} + ... + a_{N-1}, i.e. the first factor is most significant and
// A (x) B has block structure A[i,j] * B.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "qkac/tolerances.hpp"

namespace qkac {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

class OperatorMatrix {
public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(std::size_t dim);
    explicit OperatorMatrix(Matrix m);

    static OperatorMatrix identity(std::size_t dim);
    static OperatorMatrix zero(std::size_t dim);
    /// |i><j|
    static OperatorMatrix unit(std::size_t dim, std::size_t i, std::size_t j);
    static OperatorMatrix diagonal(std::span<const double> values);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& mat() const { return m_; }
    Matrix& mat() { return m_; }

    cplx operator()(std::size_t i, std::size_t j) const { return m_(Eigen::Index(i), Eigen::Index(j)); }
    cplx& operator()(std::size_t i, std::size_t j) { return m_(Eigen::Index(i), Eigen::Index(j)); }

    cplx trace() const { return m_.trace(); }
    OperatorMatrix adjoint() const { return OperatorMatrix(Matrix(m_.adjoint())); }

    bool is_hermitian(double tol) const;
    bool is_unitary(double tol) const;
    bool is_positive_semidefinite(double tol) const;

    OperatorMatrix& operator+=(const OperatorMatrix& o);
    OperatorMatrix& operator-=(const OperatorMatrix& o);
    OperatorMatrix& operator*=(cplx s);

    friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
    friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
    friend OperatorMatrix operator*(OperatorMatrix a, cplx s) { return a *= s; }
    friend OperatorMatrix operator*(cplx s, OperatorMatrix a) { return a *= s; }
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        return OperatorMatrix(Matrix(a.m_ * b.m_));
    }

private:
    Matrix m_;
};

/// Number of factors and factor dimension of H^{(x)N}.
class FactorShape {
public:
    FactorShape(std::size_t num_factors, std::size_t factor_dim,
                std::size_t max_dim = kDefaultMaxDim);

    std::size_t num_factors() const { return n_; }
    std::size_t factor_dim() const { return d_; }
    std::size_t total_dim() const { return total_; }

    std::vector<std::size_t> digits(std::size_t flat) const;
    std::size_t flat(std::span<const std::size_t> digits) const;

private:
    std::size_t n_;
    std::size_t d_;
    std::size_t total_;
};

/// A validated state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    explicit DensityMatrix(OperatorMatrix op, const Tolerances& tol = {});

    const OperatorMatrix& op() const { return op_; }
    std::size_t dim() const { return op_.dim(); }
    const Matrix& mat() const { return op_.mat(); }

    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix pure(const Vector& psi);

private:
    OperatorMatrix op_;
};

/// Hermitian eigen-decomposition; rejects non-Hermitian input.
struct HermitianEigen {
    RealVector values;  // ascending
    Matrix vectors;     // columns
};
HermitianEigen hermitian_eigen(const OperatorMatrix& a, double herm_tol = 1e-8);

/// f(A) for Hermitian A through the eigen-decomposition.
OperatorMatrix hermitian_function(const OperatorMatrix& a, const std::function<double(double)>& f,
                                  double herm_tol = 1e-8);
OperatorMatrix hermitian_log(const OperatorMatrix& a, double herm_tol = 1e-8);
OperatorMatrix hermitian_exp(const OperatorMatrix& a, double herm_tol = 1e-8);
/// A^s for positive semidefinite A (negative rounding eigenvalues are clamped to 0).
OperatorMatrix hermitian_power(const OperatorMatrix& a, double s, double herm_tol = 1e-8);

OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix tensor_power(const OperatorMatrix& a, std::size_t n);

/// Flat-index image under the factor permutation: U_pi |a_0 ... a_{N-1}> = |a_{pi(0)} ... a_{pi(N-1)}>.
std::vector<std::size_t> permutation_index_map(std::span<const std::size_t> pi, const FactorShape& shape);

/// U_pi as an explicit unitary. Note U_pi U_rho = U_{rho o pi}.
OperatorMatrix permutation_unitary(std::span<const std::size_t> pi, const FactorShape& shape);

/// U_pi X U_pi* computed by index relabelling.
OperatorMatrix permute_factors(const OperatorMatrix& x, std::span<const std::size_t> pi,
                               const FactorShape& shape);

/// Operator acting as `a2` on factors (i, j) (in that order) and as identity elsewhere.
OperatorMatrix embed_pair(const OperatorMatrix& a2, std::size_t i, std::size_t j, const FactorShape& shape);

/// Operator acting as `a` on the first k factors and as identity on the rest.
OperatorMatrix embed_leading(const OperatorMatrix& a, std::size_t k, const FactorShape& shape);

/// Partial trace keeping the listed factors (ascending order preserved).
OperatorMatrix partial_trace(const OperatorMatrix& x, const FactorShape& shape, std::span<const std::size_t> keep);
/// Partial trace keeping the first k factors.
OperatorMatrix partial_trace(const OperatorMatrix& x, const FactorShape& shape, std::size_t keep_first);
DensityMatrix partial_trace(const DensityMatrix& rho, const FactorShape& shape, std::size_t keep_first);

/// S(rho) = -Tr rho log rho in nats; eigenvalues at or below tol_psd contribute 0.
double von_neumann_entropy(const OperatorMatrix& rho, const Tolerances& tol = {});
double von_neumann_entropy(const DensityMatrix& rho, const Tolerances& tol = {});

/// Umegaki relative entropy; +infinity when supp(rho) is not inside supp(sigma).
double relative_entropy(const OperatorMatrix& rho, const OperatorMatrix& sigma, const Tolerances& tol = {});
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma, const Tolerances& tol = {});

double hs_inner_real(const OperatorMatrix& a, const OperatorMatrix& b);
cplx hs_inner(const OperatorMatrix& a, const OperatorMatrix& b);
double hs_norm(const OperatorMatrix& a);
double trace_norm(const OperatorMatrix& a);
double operator_norm(const OperatorMatrix& a);
double max_abs(const OperatorMatrix& a);
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Row-major vectorisation: vec(X)[i*dim + j] = X(i, j).
Vector vec(const OperatorMatrix& x);
OperatorMatrix unvec(const Vector& v, std::size_t dim);

}  // namespace qkac

#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library beyond the basic matrix types.

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "qkac/operators.hpp"

namespace oracle {

using qkac::cplx;
using qkac::Matrix;
using qkac::OperatorMatrix;

inline std::vector<std::size_t> digits(std::size_t flat, std::size_t n, std::size_t d) {
    std::vector<std::size_t> a(n);
    for (std::size_t k = n; k-- > 0;) {
        a[k] = flat % d;
        flat /= d;
    }
    return a;
}

inline std::size_t flat(const std::vector<std::size_t>& a, std::size_t d) {
    std::size_t f = 0;
    for (auto x : a) f = f * d + x;
    return f;
}

/// Breadth-first search over raw multi-indices with single pair moves.
/// Returns, for every energy, the number of connected components.
inline std::map<long long, std::size_t> bfs_class_counts(const std::vector<long long>& e, std::size_t n) {
    const std::size_t d = e.size();
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= d;
    std::vector<long long> energy(total);
    for (std::size_t f = 0; f < total; ++f) {
        long long s = 0;
        for (auto a : digits(f, n, d)) s += e[a];
        energy[f] = s;
    }
    std::vector<int> seen(total, 0);
    std::map<long long, std::size_t> counts;
    for (std::size_t start = 0; start < total; ++start) {
        if (seen[start]) continue;
        ++counts[energy[start]];
        std::queue<std::size_t> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const auto cur = digits(q.front(), n, d);
            q.pop();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    for (std::size_t a = 0; a < d; ++a)
                        for (std::size_t b = 0; b < d; ++b) {
                            if (e[a] + e[b] != e[cur[i]] + e[cur[j]]) continue;
                            auto next = cur;
                            next[i] = a;
                            next[j] = b;
                            const std::size_t f = flat(next, d);
                            if (!seen[f]) {
                                seen[f] = 1;
                                q.push(f);
                            }
                        }
        }
    }
    return counts;
}

/// Uniform qubit channel entrywise, in the swapped basis |00>,|10>,|01>,|11>.
inline Matrix uniform_qubit_swapped(const Matrix& a) {
    Matrix q = Matrix::Zero(4, 4);
    q(0, 0) = a(0, 0);
    q(1, 1) = 0.5 * (a(1, 1) + a(2, 2));
    q(2, 2) = 0.5 * (a(1, 1) + a(2, 2));
    q(3, 3) = a(3, 3);
    return q;
}

/// Tilted qubit channel entrywise, in the swapped basis; entry (4,3) is built from a_{4,3}.
inline Matrix tilted_qubit_swapped(const Matrix& a) {
    Matrix q = uniform_qubit_swapped(a);
    q(0, 1) = a(0, 1) / 8.0;
    q(0, 2) = a(0, 2) / 8.0;
    q(0, 3) = a(0, 3) / 2.0;
    q(1, 0) = a(1, 0) / 8.0;
    q(1, 3) = a(1, 3) / 4.0;
    q(2, 0) = a(2, 0) / 8.0;
    q(2, 3) = a(2, 3) / 4.0;
    q(3, 0) = a(3, 0) / 2.0;
    q(3, 1) = a(3, 1) / 4.0;
    q(3, 2) = a(3, 2) / 4.0;
    return q;
}

/// Trapezoid rule on the 4-torus (n points per angle) of U E_ij U* for all 16 swapped-basis
/// matrix units E_ij (index 4*i + j), with U = diag(e^{i eta}, R(theta, psi, phi), 1) and
/// weight prod (1 + cos) when tilted.
inline std::vector<Matrix> torus_units_swapped(std::size_t n, bool tilted) {
    const cplx i(0.0, 1.0);
    std::vector<Matrix> acc(16, Matrix::Zero(4, 4));
    std::vector<double> ang(n), cw(n);
    for (std::size_t k = 0; k < n; ++k) {
        ang[k] = 2 * std::numbers::pi * double(k) / double(n);
        cw[k] = tilted ? 1 + std::cos(ang[k]) : 1.0;
    }
    double total = 0.0;
    Matrix u = Matrix::Zero(4, 4);
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2)
            for (std::size_t k3 = 0; k3 < n; ++k3)
                for (std::size_t k4 = 0; k4 < n; ++k4) {
                    const double w = cw[k1] * cw[k2] * cw[k3] * cw[k4];
                    const double eta = ang[k1], th = ang[k2], ps = ang[k3], ph = ang[k4];
                    u(0, 0) = std::exp(i * eta);
                    u(1, 1) = std::exp(i * ps) * std::cos(th);
                    u(1, 2) = -std::exp(i * ph) * std::sin(th);
                    u(2, 1) = std::exp(-i * ph) * std::sin(th);
                    u(2, 2) = std::exp(-i * ps) * std::cos(th);
                    u(3, 3) = 1.0;
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) acc[4 * a + b] += w * (u.col(a) * u.col(b).adjoint());
                    total += w;
                }
    for (auto& m : acc) m /= total;
    return acc;
}

/// Composite Simpson rule of int_0^1 rho^s B rho^{1-s} ds for positive diagonal rho.
inline Matrix bkm_quadrature_diag(const std::vector<double>& lambda, const Matrix& b, int intervals = 512) {
    const Eigen::Index d = Eigen::Index(lambda.size());
    Matrix acc = Matrix::Zero(d, d);
    const double h = 1.0 / intervals;
    for (int k = 0; k <= intervals; ++k) {
        const double s = k * h;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                acc(i, j) += w * std::pow(lambda[i], s) * b(i, j) * std::pow(lambda[j], 1.0 - s);
    }
    return acc * (h / 3.0);
}

/// Same quadrature for a general positive definite rho, carried out in its eigenbasis.
inline Matrix bkm_quadrature(const Matrix& rho, const Matrix& b, int intervals = 512) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const Matrix v = es.eigenvectors();
    std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return v * bkm_quadrature_diag(lam, v.adjoint() * b * v, intervals) * v.adjoint();
}

/// Naive partial trace over the last n-k factors by explicit summation.
inline Matrix trace_out_tail(const Matrix& x, std::size_t n, std::size_t k, std::size_t d) {
    std::size_t dk = 1, dt = 1;
    for (std::size_t f = 0; f < k; ++f) dk *= d;
    for (std::size_t f = k; f < n; ++f) dt *= d;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b)
            for (std::size_t t = 0; t < dt; ++t) out(Eigen::Index(a), Eigen::Index(b)) += x(Eigen::Index(a * dt + t), Eigen::Index(b * dt + t));
    return out;
}

/// Entrywise application of a two-particle superoperator (row-major vec convention)
/// to factors (i, j) of an operator on n factors of dimension d.
inline Matrix pair_channel_entrywise(const Matrix& q, const Matrix& x, std::size_t i, std::size_t j, std::size_t n,
                                     std::size_t d) {
    const std::size_t dim = std::size_t(x.rows()), d2 = d * d;
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) {
            const auto al = digits(a, n, d), be = digits(b, n, d);
            const std::size_t row = (al[i] * d + al[j]) * d2 + (be[i] * d + be[j]);
            auto ga = al;
            auto de = be;
            cplx acc = 0.0;
            for (std::size_t c = 0; c < d2; ++c)
                for (std::size_t e = 0; e < d2; ++e) {
                    ga[i] = c / d;
                    ga[j] = c % d;
                    de[i] = e / d;
                    de[j] = e % d;
                    acc += q(Eigen::Index(row), Eigen::Index(c * d2 + e)) * x(Eigen::Index(flat(ga, d)), Eigen::Index(flat(de, d)));
                }
            out(Eigen::Index(a), Eigen::Index(b)) = acc;
        }
    return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> nd;
    Matrix m{Eigen::Index(d), Eigen::Index(d)};
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, std::size_t d) {
    const Matrix m = random_matrix(rng, d);
    return 0.5 * (m + m.adjoint());
}

/// Random full-rank density matrix G G* / Tr, plus a small multiple of the identity.
inline Matrix random_density(std::mt19937_64& rng, std::size_t d, double floor = 0.0) {
    const Matrix g = random_matrix(rng, d);
    Matrix r = g * g.adjoint();
    r += floor * r.trace().real() * Matrix::Identity(Eigen::Index(d), Eigen::Index(d));
    return r / r.trace().real();
}

/// Swapped basis |00>,|10>,|01>,|11> to first-factor-major ordering: swap positions 1 and 2.
inline Matrix swapped_to_internal(const Matrix& a) {
    const int p[4] = {0, 2, 1, 3};
    Matrix out(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out(p[i], p[j]) = a(i, j);
    return out;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Trace norm via singular values.
inline double trace_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace oracle

#include "qkac/chaos.hpp"

#include "qkac/boltzmann.hpp"
#include "qkac/master.hpp"

namespace qkac {

OperatorMatrix gamma_k(const Superoperator& q, const OperatorMatrix& b, std::size_t k, std::size_t d) {
    if (k < 1) throw ValidationError("gamma_k: k must be at least 1");
    const FactorShape in(k, d);
    if (b.dim() != in.total_dim()) throw ValidationError("gamma_k: operator is not on H^k");
    const FactorShape shape(k + 1, d);
    const OperatorMatrix lifted = tensor(b, OperatorMatrix::identity(d));
    OperatorMatrix acc(shape.total_dim());
    for (std::size_t i = 0; i < k; ++i) acc += apply_pair_channel(q, lifted, i, k, shape) - lifted;
    return acc * cplx(2.0);
}

OperatorMatrix g_k(const Superoperator& q, const OperatorMatrix& b, std::size_t k, std::size_t n, std::size_t d) {
    if (k >= n) throw ValidationError("g_k: need k < N");
    const FactorShape in(k, d);
    if (b.dim() != in.total_dim()) throw ValidationError("g_k: operator is not on H^k");
    OperatorMatrix inner(in.total_dim());
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) inner += apply_pair_channel(q, b, i, j, in) - b;
    const double nm1 = double(n - 1);
    return tensor(inner, OperatorMatrix::identity(d)) * cplx(2.0 / nm1) +
           gamma_k(q, b, k, d) * cplx(double(n - k) / nm1);
}

double derivation_check(const Superoperator& q, const OperatorMatrix& x, std::size_t j, const OperatorMatrix& y,
                        std::size_t m, std::size_t d) {
    const std::size_t k = j + m;
    if (j < 1 || m < 1) throw ValidationError("derivation_check: both factors need at least one particle");
    const FactorShape big(k + 1, d);
    const OperatorMatrix lhs = gamma_k(q, tensor(x, y), k, d);

    std::vector<std::size_t> pi(k + 1);
    for (std::size_t f = 0; f <= k; ++f) pi[f] = f;
    std::swap(pi[j], pi[k]);
    const OperatorMatrix moved =
        permute_factors(tensor(gamma_k(q, x, j, d), OperatorMatrix::identity(FactorShape(m, d).total_dim())), pi, big);
    const OperatorMatrix y_mid = tensor(tensor(OperatorMatrix::identity(FactorShape(j, d).total_dim()), y),
                                        OperatorMatrix::identity(d));
    const OperatorMatrix rhs = moved * y_mid + tensor(x, gamma_k(q, y, m, d));
    return max_abs(lhs - rhs);
}

std::vector<ChaosRow> run_chaos_experiment(const ChaosExperiment& exp, const Tolerances& tol) {
    if (exp.spec == nullptr) throw ValidationError("chaos: no collision spec");
    if (exp.t_grid.empty() || exp.t_grid.front() != 0.0) throw ValidationError("chaos: time grid must start at 0");
    const std::size_t d = exp.spec->model().dim();
    if (exp.rho0.dim() != d) throw ValidationError("chaos: initial state has the wrong dimension");
    for (std::size_t n : exp.n_list) {
        if (n < 2) throw ValidationError("chaos: every N must be at least 2");
        FactorShape(n, d, exp.max_dim);
    }

    const Superoperator q = build_Q(*exp.spec);
    std::vector<DensityMatrix> qkbe;
    if (exp.t_grid.size() == 1) {
        qkbe.push_back(exp.rho0);
    } else {
        qkbe = qkbe_integrate(q, exp.rho0, exp.t_grid, tol).states;
    }

    std::vector<ChaosRow> rows;
    for (std::size_t n : exp.n_list) {
        const KacGenerator gen(*exp.spec, n, exp.max_dim);
        DensityMatrix state(tensor_power(exp.rho0.op(), n), tol);
        for (std::size_t s = 0; s < exp.t_grid.size(); ++s) {
            if (s > 0) state = evolve_master(gen, state, exp.t_grid[s] - exp.t_grid[s - 1], tol);
            const OperatorMatrix one = partial_trace(state.op(), gen.shape(), std::size_t{1});
            const OperatorMatrix two = partial_trace(state.op(), gen.shape(), std::size_t{2});
            const OperatorMatrix& r = qkbe[s].op();
            rows.push_back({n, exp.t_grid[s], trace_norm(one - r), trace_norm(two - tensor(r, r)),
                            von_neumann_entropy(one, tol), von_neumann_entropy(r, tol)});
        }
    }
    return rows;
}

}  // namespace qkac

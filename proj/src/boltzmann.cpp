#include "qkac/boltzmann.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace qkac {

OperatorMatrix wild(const Superoperator& q, const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.dim() != b.dim() || q.dim() != a.dim() * a.dim()) throw ValidationError("wild: dimension mismatch");
    return partial_trace(q.apply(tensor(a, b)), FactorShape(2, a.dim()), std::size_t{1});
}

OperatorMatrix wild(const CollisionSpec& spec, const OperatorMatrix& a, const OperatorMatrix& b) {
    return wild(build_Q(spec), a, b);
}

OperatorMatrix wild_diagonal(const SingleParticleModel& model, const OperatorMatrix& a, const OperatorMatrix& b) {
    const std::size_t d = model.dim();
    if (a.dim() != d || b.dim() != d) throw ValidationError("wild_diagonal: dimension mismatch");
    std::map<Energy, std::size_t> shell_dim;
    std::map<Energy, cplx> shell_mass;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const Energy e = model.energy(i) + model.energy(k);
            ++shell_dim[e];
            shell_mass[e] += a(i, i) * b(k, k);
        }
    OperatorMatrix out(d);
    for (std::size_t j = 0; j < d; ++j) {
        cplx v = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const Energy e = model.energy(j) + model.energy(l);
            v += shell_mass[e] / double(shell_dim[e]);
        }
        out(j, j) = v;
    }
    return out;
}

OperatorMatrix diagonal_projection(const SingleParticleModel& model, const OperatorMatrix& a) {
    if (a.dim() != model.dim()) throw ValidationError("diagonal_projection: dimension mismatch");
    OperatorMatrix out(a.dim());
    for (std::size_t j = 0; j < a.dim(); ++j) out(j, j) = a(j, j);
    return out;
}

namespace {

OperatorMatrix qkbe_rhs(const Superoperator& q, const OperatorMatrix& rho) {
    return (wild(q, rho, rho) - rho) * cplx(2.0);
}

OperatorMatrix rk4_step(const Superoperator& q, const OperatorMatrix& y, double h) {
    const OperatorMatrix k1 = qkbe_rhs(q, y);
    const OperatorMatrix k2 = qkbe_rhs(q, y + k1 * cplx(0.5 * h));
    const OperatorMatrix k3 = qkbe_rhs(q, y + k2 * cplx(0.5 * h));
    const OperatorMatrix k4 = qkbe_rhs(q, y + k3 * cplx(h));
    return y + (k1 + k2 * cplx(2.0) + k3 * cplx(2.0) + k4) * cplx(h / 6.0);
}

// Integral of uniformly sampled values: Simpson, closing an odd count with the 3/8 rule.
OperatorMatrix uniform_integral(const std::vector<OperatorMatrix>& f, double h) {
    const std::size_t n = f.size() - 1;
    OperatorMatrix acc(f.front().dim());
    if (n == 0) return acc;
    if (n == 1) return (f[0] + f[1]) * cplx(0.5 * h);
    std::size_t simpson_end = (n % 2 == 0) ? n : n - 3;
    for (std::size_t k = 0; k + 2 <= simpson_end; k += 2)
        acc += (f[k] + f[k + 1] * cplx(4.0) + f[k + 2]) * cplx(h / 3.0);
    if (n % 2 == 1) {
        const std::size_t k = n - 3;
        acc += (f[k] + f[k + 1] * cplx(3.0) + f[k + 2] * cplx(3.0) + f[k + 3]) * cplx(3.0 * h / 8.0);
    }
    return acc;
}

}  // namespace

Trajectory qkbe_integrate(const Superoperator& q, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                          const Tolerances& tol, const QkbeOptions& opt) {
    if (t_grid.empty() || t_grid.front() != 0.0) throw ValidationError("qkbe_integrate: time grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw ValidationError("qkbe_integrate: time grid must be increasing");
    if (q.dim() != rho0.dim() * rho0.dim()) throw ValidationError("qkbe_integrate: channel dimension mismatch");

    const double span = t_grid.back();
    const double h0 = span > 0.0 ? std::min(0.01, span / 1000.0) : 0.01;

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(rho0);

    OperatorMatrix current = rho0.op();
    double picard = 0.0;
    OperatorMatrix integral(rho0.dim());  // int_0^t e^{2s} 2 rho*rho ds

    for (std::size_t seg = 1; seg < t_grid.size(); ++seg) {
        const double ta = t_grid[seg - 1];
        const double len = t_grid[seg] - ta;
        std::size_t halvings = 0;
        for (;;) {
            const double h_target = h0 / std::pow(2.0, double(halvings));
            const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil(len / h_target - 1e-9)));
            const double h = len / double(n);
            std::vector<OperatorMatrix> path{current};
            for (std::size_t k = 0; k < n; ++k) path.push_back(rk4_step(q, path.back(), h));
            OperatorMatrix end = (path.back() + path.back().adjoint()) * cplx(0.5);
            if (!end.is_positive_semidefinite(tol.psd)) {
                if (++halvings > opt.max_halvings) {
                    std::ostringstream os;
                    os << "qkbe_integrate: PSD violation near t=" << t_grid[seg] << " persists after step halving";
                    throw ContractViolation(os.str());
                }
                continue;
            }
            if (opt.picard_check) {
                std::vector<OperatorMatrix> f;
                f.reserve(path.size());
                for (std::size_t k = 0; k < path.size(); ++k)
                    f.push_back(wild(q, path[k], path[k]) * cplx(2.0 * std::exp(2.0 * (ta + double(k) * h))));
                integral += uniform_integral(f, h);
            }
            traj.steps += n;
            const double tr = end.trace().real();
            traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(tr - 1.0));
            end *= cplx(1.0 / tr);
            current = end;
            break;
        }
        traj.times.push_back(t_grid[seg]);
        traj.states.emplace_back(current, tol);
        if (opt.picard_check) {
            const OperatorMatrix mild = (rho0.op() + integral) * cplx(std::exp(-2.0 * t_grid[seg]));
            picard = std::max(picard, trace_norm(mild - current));
        }
    }
    if (opt.picard_check) {
        traj.picard_residual = picard;
        if (picard > tol.picard) {
            std::ostringstream os;
            os << "qkbe_integrate: mild-form residual " << picard << " exceeds tolerance " << tol.picard;
            throw ContractViolation(os.str());
        }
    }
    return traj;
}

SteadyStateFamily classify_steady_states(const SingleParticleModel& model) {
    SteadyStateFamily fam;
    fam.levels = model.distinct_energies();
    const std::size_t m = fam.levels.size();

    std::vector<Eigen::VectorXd> rows;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t e = c; e < m; ++e) {
                    if (std::make_pair(c, e) <= std::make_pair(a, b)) continue;
                    if (fam.levels[a] + fam.levels[b] != fam.levels[c] + fam.levels[e]) continue;
                    Eigen::VectorXd r = Eigen::VectorXd::Zero(Eigen::Index(m));
                    r(Eigen::Index(a)) += 1.0;
                    r(Eigen::Index(b)) += 1.0;
                    r(Eigen::Index(c)) -= 1.0;
                    r(Eigen::Index(e)) -= 1.0;
                    rows.push_back(r);
                }
    fam.relation_count = rows.size();

    RealMatrix null;
    if (rows.empty()) {
        null = RealMatrix::Identity(Eigen::Index(m), Eigen::Index(m));
    } else {
        RealMatrix c(Eigen::Index(rows.size()), Eigen::Index(m));
        for (std::size_t k = 0; k < rows.size(); ++k) c.row(Eigen::Index(k)) = rows[k].transpose();
        Eigen::JacobiSVD<RealMatrix> svd(c, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cut = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 1.0);
        Eigen::Index rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > cut) ++rank;
        null = svd.matrixV().rightCols(Eigen::Index(m) - rank);
    }

    std::vector<Eigen::VectorXd> candidates;
    candidates.push_back(Eigen::VectorXd::Ones(Eigen::Index(m)));
    Eigen::VectorXd energy(static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) energy(Eigen::Index(a)) = double(fam.levels[a]);
    candidates.push_back(energy);
    for (Eigen::Index k = 0; k < null.cols(); ++k) candidates.push_back(null.col(k));

    std::vector<Eigen::VectorXd> kept, ortho;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        Eigen::VectorXd r = candidates[k];
        for (const auto& o : ortho) r -= o.dot(r) * o;
        if (r.norm() <= 1e-9 * std::max(1.0, candidates[k].norm())) continue;
        ortho.push_back(r / r.norm());
        kept.push_back(k < 2 ? candidates[k] : ortho.back());
    }
    fam.basis.resize(Eigen::Index(m), Eigen::Index(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) fam.basis.col(Eigen::Index(k)) = kept[k];
    return fam;
}

namespace {

std::size_t level_index(const SteadyStateFamily& fam, Energy e) {
    return std::size_t(std::lower_bound(fam.levels.begin(), fam.levels.end(), e) - fam.levels.begin());
}

}  // namespace

DensityMatrix steady_state(const SingleParticleModel& model, const SteadyStateFamily& family,
                           const std::vector<double>& coefficients) {
    if (coefficients.size() != family.dimension())
        throw ValidationError("steady_state: coefficient count does not match the family dimension");
    Eigen::VectorXd c(Eigen::Index(coefficients.size()));
    for (std::size_t k = 0; k < coefficients.size(); ++k) c(Eigen::Index(k)) = coefficients[k];
    const Eigen::VectorXd x = family.basis * c;
    std::vector<double> logs(model.dim());
    for (std::size_t j = 0; j < model.dim(); ++j) logs[j] = x(Eigen::Index(level_index(family, model.energy(j))));
    const double top = *std::max_element(logs.begin(), logs.end());
    double z = 0.0;
    for (double& v : logs) z += (v = std::exp(v - top));
    for (double& v : logs) v /= z;
    return DensityMatrix(OperatorMatrix::diagonal(logs));
}

bool is_steady(const Superoperator& q, const DensityMatrix& rho, double tol) {
    return trace_norm(wild(q, rho.op(), rho.op()) - rho.op()) <= tol;
}

std::vector<OperatorMatrix> collision_invariants_basis(const SingleParticleModel& model) {
    const auto fam = classify_steady_states(model);
    std::vector<OperatorMatrix> out;
    for (Eigen::Index k = 0; k < fam.basis.cols(); ++k) {
        std::vector<double> diag(model.dim());
        for (std::size_t j = 0; j < model.dim(); ++j)
            diag[j] = fam.basis(Eigen::Index(level_index(fam, model.energy(j))), k);
        out.push_back(OperatorMatrix::diagonal(diag));
    }
    return out;
}

double conserved_check(const Trajectory& traj, const OperatorMatrix& a) {
    if (traj.states.empty()) return 0.0;
    const cplx first = (a * traj.states.front().op()).trace();
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs((a * s.op()).trace() - first));
    return worst;
}

DensityMatrix gibbs(const SingleParticleModel& model, double beta) {
    if (!std::isfinite(beta)) throw ValidationError("gibbs: beta must be finite");
    std::vector<double> w(model.dim());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < w.size(); ++j) top = std::max(top, -beta * double(model.energy(j)));
    double z = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) z += (w[j] = std::exp(-beta * double(model.energy(j)) - top));
    for (double& v : w) v /= z;
    return DensityMatrix(OperatorMatrix::diagonal(w));
}

}  // namespace qkac

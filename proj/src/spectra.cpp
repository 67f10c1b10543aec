#include "qkac/spectra.hpp"

#include <algorithm>
#include <sstream>

#include "qkac/union_find.hpp"

namespace qkac {

SingleParticleModel::SingleParticleModel(std::vector<Energy> energies) : energies_(std::move(energies)) {
    if (energies_.size() < 2) throw ValidationError("model: need at least two energy levels");
    if (!std::is_sorted(energies_.begin(), energies_.end()))
        throw ValidationError("model: energies must be sorted ascending");
}

std::vector<Energy> SingleParticleModel::distinct_energies() const {
    std::vector<Energy> out(energies_);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

OperatorMatrix SingleParticleModel::hamiltonian() const {
    OperatorMatrix h(dim());
    for (std::size_t j = 0; j < dim(); ++j) h(j, j) = double(energies_[j]);
    return h;
}

OperatorMatrix SingleParticleModel::pair_hamiltonian() const {
    const auto h = hamiltonian();
    const auto id = OperatorMatrix::identity(dim());
    return tensor(h, id) + tensor(id, h);
}

namespace {

Energy total_energy(const SingleParticleModel& model, const std::vector<std::size_t>& alpha) {
    Energy e = 0;
    for (std::size_t a : alpha) e += model.energy(a);
    return e;
}

// Energy of every flat multi-index.
std::vector<Energy> flat_energies(const SingleParticleModel& model, const FactorShape& shape) {
    std::vector<Energy> out(shape.total_dim());
    for (std::size_t f = 0; f < shape.total_dim(); ++f) out[f] = total_energy(model, shape.digits(f));
    return out;
}

void enumerate_occupancies(const SingleParticleModel& model, std::size_t level, std::size_t left, Energy target,
                           OccupancyVector& m, std::vector<OccupancyVector>& out) {
    const std::size_t d = model.dim();
    if (level + 1 == d) {
        m[level] = left;
        Energy e = 0;
        for (std::size_t j = 0; j < d; ++j) e += Energy(m[j]) * model.energy(j);
        if (e == target) out.push_back(m);
        return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
        m[level] = k;
        enumerate_occupancies(model, level + 1, left - k, target, m, out);
    }
}

struct PairMove {
    std::size_t i, j, k, l;
};

std::vector<PairMove> pair_moves(const SingleParticleModel& model) {
    const std::size_t d = model.dim();
    std::vector<PairMove> moves;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = k; l < d; ++l) {
                    if (i == k && j == l) continue;
                    if (model.energy(i) + model.energy(j) == model.energy(k) + model.energy(l))
                        moves.push_back({i, j, k, l});
                }
    return moves;
}

}  // namespace

std::vector<Shell> shell_decomposition(const SingleParticleModel& model, std::size_t n, std::size_t max_dim) {
    const FactorShape shape(n, model.dim(), max_dim);
    const auto energies = flat_energies(model, shape);
    std::map<Energy, std::vector<std::size_t>> by_energy;
    for (std::size_t f = 0; f < energies.size(); ++f) by_energy[energies[f]].push_back(f);
    std::vector<Shell> out;
    for (auto& [e, idx] : by_energy) out.push_back({e, std::move(idx)});
    return out;
}

namespace {

const Shell& find_shell(const std::vector<Shell>& shells, Energy e) {
    for (const auto& s : shells)
        if (s.energy == e) return s;
    std::ostringstream os;
    os << "energy " << e << " is not in the spectrum of H_N";
    throw ValidationError(os.str());
}

}  // namespace

OperatorMatrix shell_projector(const SingleParticleModel& model, std::size_t n, Energy e, std::size_t max_dim) {
    const auto shells = shell_decomposition(model, n, max_dim);
    const auto& shell = find_shell(shells, e);
    const FactorShape shape(n, model.dim(), max_dim);
    OperatorMatrix p(shape.total_dim());
    for (std::size_t f : shell.indices) p(f, f) = 1.0;
    return p;
}

DensityMatrix shell_state(const SingleParticleModel& model, std::size_t n, Energy e, std::size_t max_dim) {
    OperatorMatrix p = shell_projector(model, n, e, max_dim);
    const double rank = p.trace().real();
    return DensityMatrix(p * cplx(1.0 / rank));
}

OccupancyVector occupancy(std::span<const std::size_t> alpha, std::size_t d) {
    OccupancyVector m(d, 0);
    for (std::size_t a : alpha) {
        if (a >= d) throw ValidationError("occupancy: level index out of range");
        ++m[a];
    }
    return m;
}

EnergyShellPartition classify_shell(const SingleParticleModel& model, std::size_t n, Energy e, std::size_t max_dim) {
    const std::size_t d = model.dim();
    const FactorShape shape(n, d, max_dim);
    const auto shells = shell_decomposition(model, n, max_dim);
    const auto& shell = find_shell(shells, e);

    std::vector<OccupancyVector> occ;
    OccupancyVector scratch(d, 0);
    enumerate_occupancies(model, 0, n, e, scratch, occ);
    std::map<OccupancyVector, std::size_t> position;
    for (std::size_t k = 0; k < occ.size(); ++k) position[occ[k]] = k;

    UnionFind uf(occ.size());
    const auto moves = pair_moves(model);
    for (std::size_t k = 0; k < occ.size(); ++k) {
        for (const auto& mv : moves) {
            OccupancyVector m = occ[k];
            if (m[mv.i] == 0) continue;
            --m[mv.i];
            if (m[mv.j] == 0) continue;
            --m[mv.j];
            ++m[mv.k];
            ++m[mv.l];
            uf.unite(k, position.at(m));
        }
    }

    // classes ordered by first appearance among ascending flat indices
    std::map<std::size_t, std::size_t> class_of_root;
    EnergyShellPartition part{e, shell.indices, {}, {}};
    for (std::size_t f : shell.indices) {
        const auto m = occupancy(shape.digits(f), d);
        const std::size_t root = uf.find(position.at(m));
        auto [it, inserted] = class_of_root.try_emplace(root, part.classes.size());
        if (inserted) {
            part.classes.emplace_back();
            part.class_occupancies.emplace_back();
        }
        part.classes[it->second].push_back(f);
    }
    for (std::size_t k = 0; k < occ.size(); ++k)
        part.class_occupancies[class_of_root.at(uf.find(k))].push_back(occ[k]);
    return part;
}

std::vector<EnergyShellPartition> classify_all(const SingleParticleModel& model, std::size_t n, std::size_t max_dim) {
    std::vector<EnergyShellPartition> out;
    for (const auto& shell : shell_decomposition(model, n, max_dim))
        out.push_back(classify_shell(model, n, shell.energy, max_dim));
    return out;
}

ErgodicityReport is_fully_ergodic(const SingleParticleModel& model, std::size_t n, std::size_t max_dim) {
    ErgodicityReport report;
    for (const auto& part : classify_all(model, n, max_dim)) {
        std::size_t occ = 0;
        for (const auto& c : part.class_occupancies) occ += c.size();
        report.shells.push_back({part.energy, part.indices.size(), part.class_count(), occ});
        if (part.class_count() != 1) report.fully_ergodic = false;
        if (occ > 1) report.accidental_degeneracy = true;
    }
    return report;
}

std::vector<DensityMatrix> class_states(const SingleParticleModel& model, std::size_t n, std::size_t max_dim) {
    const FactorShape shape(n, model.dim(), max_dim);
    std::vector<DensityMatrix> out;
    for (const auto& part : classify_all(model, n, max_dim)) {
        for (const auto& c : part.classes) {
            OperatorMatrix p(shape.total_dim());
            for (std::size_t f : c) p(f, f) = 1.0 / double(c.size());
            out.emplace_back(std::move(p));
        }
    }
    return out;
}

OperatorMatrix commutant_projection(const SingleParticleModel& model, std::size_t n, const OperatorMatrix& x,
                                    std::size_t max_dim) {
    const FactorShape shape(n, model.dim(), max_dim);
    if (x.dim() != shape.total_dim()) throw ValidationError("commutant_projection: dimension mismatch");
    OperatorMatrix out(shape.total_dim());
    for (const auto& part : classify_all(model, n, max_dim)) {
        for (const auto& c : part.classes) {
            cplx mass = 0.0;
            for (std::size_t f : c) mass += x(f, f);
            mass /= double(c.size());
            for (std::size_t f : c) out(f, f) = mass;
        }
    }
    return out;
}

DensityMatrix commutant_projection(const SingleParticleModel& model, std::size_t n, const DensityMatrix& rho,
                                   std::size_t max_dim) {
    return DensityMatrix(commutant_projection(model, n, rho.op(), max_dim));
}

}  // namespace qkac

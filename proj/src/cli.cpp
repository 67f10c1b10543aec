#include "qkac/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qkac/boltzmann.hpp"
#include "qkac/chaos.hpp"
#include "qkac/linearized.hpp"
#include "qkac/master.hpp"

namespace qkac::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ValidationError("config field '" + where + "': " + what);
}

const json& need(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) bad(where + key, "missing");
    return obj.at(key);
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(where, "expected a non-negative integer");
    return v.get<std::size_t>();
}

cplx as_complex(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    bad(where, "expected a number or [re, im]");
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string shortest(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) { row(header); }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os_ << (k ? "," : "") << csv_field(cells[k]);
        os_ << "\r\n";
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

struct Context {
    const RunConfig& cfg;
    SingleParticleModel model;
    std::mt19937_64 rng;

    explicit Context(const RunConfig& c) : cfg(c), model(c.energies), rng(c.seed) {}

    const json& params() const { return cfg.params; }
    std::string p(const std::string& key) const { return "params." + key; }

    std::size_t count(const std::string& key) const { return as_count(need(params(), key, "params."), p(key)); }

    std::size_t count_or(const std::string& key, std::size_t fallback) const {
        return params().contains(key) ? as_count(params().at(key), p(key)) : fallback;
    }

    CollisionSpec spec() const {
        const json& s = cfg.spec;
        if (s.is_object()) return load_sampled_file(need(s, "file", "spec.").get<std::string>(), model);
        const std::string name = s.get<std::string>();
        const bool qubit = model.energies() == std::vector<Energy>{0, 1};
        if (name == "qubit_uniform" || name == "qubit_tilted" || name == "qubit_uniform_sampled" ||
            name == "qubit_tilted_sampled") {
            if (!qubit) bad("spec", "'" + name + "' needs model energies [0, 1]");
            const std::size_t pts = count_or("points_per_angle", 16);
            if (name == "qubit_uniform") return qubit_uniform_spec();
            if (name == "qubit_tilted") return qubit_tilted_spec();
            if (name == "qubit_uniform_sampled") return qubit_uniform_sampled(pts);
            return qubit_tilted_sampled(pts);
        }
        if (name == "exact_EA2") return exact_EA2_spec(model);
        bad("spec", "unknown spec '" + name + "'");
    }

    std::vector<double> time_grid() const {
        if (params().contains("t_grid")) {
            std::vector<double> t;
            for (const auto& v : params().at("t_grid")) t.push_back(as_double(v, p("t_grid")));
            if (t.empty() || t.front() != 0.0) bad(p("t_grid"), "must start at 0");
            for (std::size_t k = 1; k < t.size(); ++k)
                if (!(t[k] > t[k - 1])) bad(p("t_grid"), "must increase");
            return t;
        }
        const double t_max = as_double(need(params(), "t_max", "params."), p("t_max"));
        const std::size_t steps = count("steps");
        if (!(t_max > 0.0)) bad(p("t_max"), "must be positive");
        if (steps == 0) bad(p("steps"), "must be positive");
        std::vector<double> t(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) t[k] = t_max * double(k) / double(steps);
        return t;
    }

    Matrix random_density(std::size_t dim, double floor) {
        std::normal_distribution<double> nd;
        Matrix g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(nd(rng), nd(rng));
        Matrix r = g * g.adjoint();
        r += floor * r.trace().real() * Matrix::Identity(g.rows(), g.cols());
        return r / r.trace().real();
    }

    DensityMatrix checked(OperatorMatrix r, const std::string& where) const {
        try {
            return DensityMatrix(std::move(r), cfg.tol);
        } catch (const ValidationError& e) {
            bad(where, e.what());
        }
    }

    /// Single-particle state from one of: {"qubit": {"a", "z"}}, {"diag": [...]},
    /// {"gibbs": beta}, {"matrix": rows}, {"random": {"floor"}}.
    DensityMatrix single_state(const json& v, const std::string& where) {
        const std::size_t d = model.dim();
        if (!v.is_object() || v.size() != 1) bad(where, "expected exactly one of qubit, diag, gibbs, matrix, random");
        const auto& [kind, body] = *v.items().begin();
        const std::string w = where + "." + kind;
        if (kind == "gibbs") return gibbs(model, as_double(body, w));
        if (kind == "qubit") {
            if (d != 2) bad(w, "needs a two-level model");
            const double a = as_double(need(body, "a", w + "."), w + ".a");
            const cplx z = body.contains("z") ? as_complex(body.at("z"), w + ".z") : cplx(0.0);
            OperatorMatrix r(2);
            r(0, 0) = a;
            r(1, 1) = 1.0 - a;
            r(0, 1) = z;
            r(1, 0) = std::conj(z);
            return checked(r, w);
        }
        if (kind == "diag") {
            if (!body.is_array() || body.size() != d) bad(w, "expected " + std::to_string(d) + " entries");
            std::vector<double> p;
            for (const auto& x : body) p.push_back(as_double(x, w));
            return checked(OperatorMatrix::diagonal(p), w);
        }
        if (kind == "matrix") {
            if (!body.is_array() || body.size() != d) bad(w, "expected " + std::to_string(d) + " rows");
            OperatorMatrix r(d);
            for (std::size_t i = 0; i < d; ++i) {
                if (!body[i].is_array() || body[i].size() != d) bad(w, "row " + std::to_string(i) + " has the wrong length");
                for (std::size_t j = 0; j < d; ++j) r(i, j) = as_complex(body[i][j], w);
            }
            return checked(r, w);
        }
        if (kind == "random") {
            const double floor = body.contains("floor") ? as_double(body.at("floor"), w + ".floor") : 0.0;
            return DensityMatrix(OperatorMatrix(random_density(d, floor)), cfg.tol);
        }
        bad(where, "unknown state kind '" + kind + "'");
    }

    /// N-particle state: {"product": single}, {"random": {"floor"}} or {"basis": [a_0, ...]}.
    DensityMatrix many_state(const json& v, const FactorShape& shape, const std::string& where) {
        if (!v.is_object() || v.size() != 1) bad(where, "expected exactly one of product, random, basis");
        const auto& [kind, body] = *v.items().begin();
        const std::string w = where + "." + kind;
        if (kind == "product") {
            const auto r = single_state(body, w);
            return DensityMatrix(tensor_power(r.op(), shape.num_factors()), cfg.tol);
        }
        if (kind == "random") {
            const double floor = body.contains("floor") ? as_double(body.at("floor"), w + ".floor") : 0.0;
            return DensityMatrix(OperatorMatrix(random_density(shape.total_dim(), floor)), cfg.tol);
        }
        if (kind == "basis") {
            if (!body.is_array() || body.size() != shape.num_factors()) bad(w, "expected one level index per particle");
            std::vector<std::size_t> a;
            for (const auto& x : body) {
                a.push_back(as_count(x, w));
                if (a.back() >= shape.factor_dim()) bad(w, "level index out of range");
            }
            const std::size_t f = shape.flat(a);
            return DensityMatrix(OperatorMatrix::unit(shape.total_dim(), f, f), cfg.tol);
        }
        bad(where, "unknown state kind '" + kind + "'");
    }
};

// ---------------------------------------------------------------- commands

RunResult cmd_verify_spec(Context& ctx) {
    const auto spec = ctx.spec();
    const auto report = verify_spec(spec, ctx.cfg.tol);
    const std::string ergodic = report.passes ? (is_ergodic(spec, ctx.cfg.tol) ? "true" : "false") : "";
    const std::string kind = spec.kind() == CollisionSpec::Kind::Sampled ? "sampled" : "closed_form";
    Csv csv({"spec", "kind", "nodes", "passes", "ergodic", "axiom", "residual"});
    const std::vector<std::string> head{spec.name(), kind, std::to_string(spec.nodes().size()),
                                        report.passes ? "true" : "false", ergodic};
    if (report.violations.empty()) {
        auto row = head;
        row.insert(row.end(), {"", fmt(0.0)});
        csv.row(row);
    }
    for (const auto& v : report.violations) {
        auto row = head;
        row.insert(row.end(), {v.axiom, fmt(v.residual)});
        csv.row(row);
    }
    RunResult r{"verify-spec.csv", csv.str(), {}};
    r.notes.push_back(std::string("spec ") + spec.name() + (report.passes ? " passes" : " fails"));
    if (!ergodic.empty()) r.notes.push_back("ergodic: " + ergodic);
    return r;
}

RunResult cmd_ergodicity(Context& ctx) {
    const std::size_t n = ctx.count("N");
    const auto rep = is_fully_ergodic(ctx.model, n, ctx.cfg.max_dim);
    Csv csv({"E", "dim", "class_count", "occupancy_count"});
    for (const auto& s : rep.shells)
        csv.row({std::to_string(s.energy), std::to_string(s.dim), std::to_string(s.class_count),
                 std::to_string(s.occupancy_count)});
    RunResult r{"ergodicity.csv", csv.str(), {}};
    r.notes.push_back(std::string("fully_ergodic: ") + (rep.fully_ergodic ? "true" : "false"));
    r.notes.push_back(std::string("accidental_degeneracy: ") + (rep.accidental_degeneracy ? "true" : "false"));
    return r;
}

RunResult cmd_evolve_master(Context& ctx) {
    const std::size_t n = ctx.count("N");
    const KacGenerator gen(ctx.spec(), n, ctx.cfg.max_dim);
    const auto t = ctx.time_grid();
    const auto rho0 = ctx.many_state(need(ctx.params(), "initial", "params."), gen.shape(), "params.initial");
    const auto limit = commutant_projection(ctx.model, n, rho0, ctx.cfg.max_dim);

    Csv csv({"t", "trace_distance_to_limit", "entropy", "relative_entropy_to_limit", "min_eigenvalue", "poisson_terms",
             "trace_drift"});
    DensityMatrix cur = rho0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        EvolveStats st;
        if (k > 0) cur = evolve_master(gen, cur, t[k] - t[k - 1], ctx.cfg.tol, &st);
        csv.row({fmt(t[k]), fmt(trace_norm(cur.op() - limit.op())), fmt(von_neumann_entropy(cur)),
                 fmt(relative_entropy(cur, limit, ctx.cfg.tol)), fmt(hermitian_eigen(cur.op()).values.minCoeff()),
                 std::to_string(st.terms), fmt(st.trace_drift)});
    }
    RunResult r{"evolve-master.csv", csv.str(), {}};
    r.notes.push_back("final trace distance to commutant projection: " + fmt(trace_norm(cur.op() - limit.op())));
    return r;
}

std::string occupancy_label(const std::vector<OccupancyVector>& occ) {
    std::string out;
    for (std::size_t c = 0; c < occ.size(); ++c) {
        if (c) out += ' ';
        for (std::size_t j = 0; j < occ[c].size(); ++j) out += (j ? "-" : "") + std::to_string(occ[c][j]);
    }
    return out;
}

RunResult cmd_steady_states(Context& ctx) {
    const std::size_t n = ctx.count("N");
    const KacGenerator gen(ctx.spec(), n, ctx.cfg.max_dim);
    const auto ss = steady_states_basis(gen, ctx.cfg.tol);
    Csv csv({"index", "E", "rank", "occupancies"});
    std::size_t idx = 0;
    for (const auto& part : classify_all(ctx.model, n, ctx.cfg.max_dim))
        for (std::size_t c = 0; c < part.class_count(); ++c)
            csv.row({std::to_string(idx++), std::to_string(part.energy), std::to_string(part.classes[c].size()),
                     occupancy_label(part.class_occupancies[c])});
    RunResult r{"steady-states.csv", csv.str(), {}};
    r.notes.push_back("class_count: " + std::to_string(ss.class_count));
    r.notes.push_back("null_space_dim: " + std::to_string(ss.null_space_dim));
    r.notes.push_back(std::string("ergodic: ") + (ss.ergodic ? "true" : "false"));
    return r;
}

RunResult cmd_evolve_qkbe(Context& ctx) {
    const auto spec = ctx.spec();
    const auto q = build_Q(spec);
    const auto rho0 = ctx.single_state(need(ctx.params(), "rho0", "params."), "params.rho0");
    QkbeOptions opt;
    if (ctx.params().contains("picard")) opt.picard_check = ctx.params().at("picard").get<bool>();
    const auto traj = qkbe_integrate(q, rho0, ctx.time_grid(), ctx.cfg.tol, opt);

    const std::size_t d = ctx.model.dim();
    std::vector<std::string> header{"t", "entropy", "energy"};
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const std::string base = "rho_" + std::to_string(i) + "_" + std::to_string(j);
            header.push_back(base + "_re");
            header.push_back(base + "_im");
        }
    Csv csv(header);
    const auto h = ctx.model.hamiltonian();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& s = traj.states[k].op();
        std::vector<std::string> row{fmt(traj.times[k]), fmt(von_neumann_entropy(traj.states[k])),
                                     fmt((h * s).trace().real())};
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                row.push_back(fmt(s(i, j).real()));
                row.push_back(fmt(s(i, j).imag()));
            }
        csv.row(row);
    }
    RunResult r{"evolve-qkbe.csv", csv.str(), {}};
    r.notes.push_back("rk4_steps: " + std::to_string(traj.steps));
    r.notes.push_back("max_trace_drift: " + fmt(traj.max_trace_drift));
    if (opt.picard_check) r.notes.push_back("picard_residual: " + fmt(traj.picard_residual));
    return r;
}

RunResult cmd_steady_family(Context& ctx) {
    const auto fam = classify_steady_states(ctx.model);
    Csv csv({"column", "E", "value"});
    for (Eigen::Index c = 0; c < fam.basis.cols(); ++c)
        for (std::size_t k = 0; k < fam.levels.size(); ++k)
            csv.row({std::to_string(c), std::to_string(fam.levels[k]), fmt(fam.basis(Eigen::Index(k), c))});
    RunResult r{"steady-family.csv", csv.str(), {}};
    r.notes.push_back("dimension: " + std::to_string(fam.dimension()));
    r.notes.push_back("relations: " + std::to_string(fam.relation_count));
    return r;
}

// Whether a diagonal observable is a function of h lying in the invariant span.
bool is_invariant(const SingleParticleModel& model, const SteadyStateFamily& fam, const OperatorMatrix& a) {
    const std::size_t d = model.dim();
    if (max_abs(a - diagonal_projection(model, a)) > 1e-12) return false;
    Eigen::VectorXd f(static_cast<Eigen::Index>(fam.levels.size()));
    for (std::size_t k = 0; k < fam.levels.size(); ++k) {
        double v = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j < d; ++j) {
            if (model.energy(j) != fam.levels[k]) continue;
            if (std::isnan(v)) v = a(j, j).real();
            else if (std::abs(a(j, j).real() - v) > 1e-12) return false;
        }
        f(Eigen::Index(k)) = v;
    }
    const Eigen::VectorXd coef = fam.basis.colPivHouseholderQr().solve(f);
    return (fam.basis * coef - f).norm() < 1e-9 * std::max(1.0, f.norm());
}

RunResult cmd_check_conserved(Context& ctx) {
    const auto q = build_Q(ctx.spec());
    const auto rho0 = ctx.single_state(need(ctx.params(), "rho0", "params."), "params.rho0");
    const auto traj = qkbe_integrate(q, rho0, ctx.time_grid(), ctx.cfg.tol);
    const auto fam = classify_steady_states(ctx.model);
    const std::size_t d = ctx.model.dim();
    const auto h = ctx.model.hamiltonian();

    std::vector<std::pair<std::string, OperatorMatrix>> obs;
    json list = ctx.params().contains("observables") ? ctx.params().at("observables")
                                                     : json::array({"identity", "h", "h2", "invariants"});
    for (const auto& o : list) {
        if (o.is_object()) {
            const auto& diag = need(o, "diag", "params.observables[].");
            if (!diag.is_array() || diag.size() != d) bad("params.observables[].diag", "wrong length");
            std::vector<double> v;
            for (const auto& x : diag) v.push_back(as_double(x, "params.observables[].diag"));
            obs.emplace_back(o.contains("name") ? o.at("name").get<std::string>() : o.dump(), OperatorMatrix::diagonal(v));
            continue;
        }
        const std::string name = o.get<std::string>();
        if (name == "identity") obs.emplace_back(name, OperatorMatrix::identity(d));
        else if (name == "h") obs.emplace_back(name, h);
        else if (name == "h2") obs.emplace_back(name, h * h);
        else if (name == "invariants") {
            const auto inv = collision_invariants_basis(ctx.model);
            for (std::size_t k = 0; k < inv.size(); ++k) obs.emplace_back("invariant_" + std::to_string(k), inv[k]);
        } else
            bad("params.observables", "unknown observable '" + name + "'");
    }
    Csv csv({"observable", "max_drift", "collision_invariant"});
    for (const auto& [name, a] : obs)
        csv.row({name, fmt(conserved_check(traj, a)), is_invariant(ctx.model, fam, a) ? "true" : "false"});
    return {"check-conserved.csv", csv.str(), {"max_trace_drift: " + fmt(traj.max_trace_drift)}};
}

RunResult cmd_chaos(Context& ctx) {
    const auto spec = ctx.spec();
    ChaosExperiment exp{&spec, ctx.single_state(need(ctx.params(), "rho0", "params."), "params.rho0"), {},
                        ctx.time_grid(), ctx.cfg.max_dim};
    for (const auto& v : need(ctx.params(), "N_list", "params.")) exp.n_list.push_back(as_count(v, "params.N_list"));
    if (exp.n_list.empty()) bad("params.N_list", "must not be empty");
    Csv csv({"N", "t", "delta1", "delta2", "entropy_N", "entropy_qkbe"});
    for (const auto& row : run_chaos_experiment(exp, ctx.cfg.tol))
        csv.row({std::to_string(row.n), fmt(row.t), fmt(row.delta1), fmt(row.delta2), fmt(row.entropy_n),
                 fmt(row.entropy_qkbe)});
    return {"chaos.csv", csv.str(), {}};
}

RunResult cmd_gap(Context& ctx) {
    const auto spec = ctx.spec();
    const auto q = build_Q(spec);
    const json& list = need(ctx.params(), "rho_inf", "params.");
    if (!list.is_array() || list.empty()) bad("params.rho_inf", "expected a non-empty list of states");
    Csv csv({"spec", "rho_inf_params", "gap", "kernel_dim"});
    for (const auto& entry : list) {
        const BKMGeometry geo(ctx.single_state(entry, "params.rho_inf[]"), ctx.cfg.tol);
        const auto g = spectral_gap(q, ctx.model, geo, ctx.cfg.tol);
        csv.row({spec.name(), entry.dump(), fmt(g.gap), std::to_string(g.kernel_dim)});
    }
    return {"gap.csv", csv.str(), {}};
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp);
        out << content;
        if (!out) throw ValidationError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

RunConfig parse_config(const json& doc, const std::map<std::string, double>& tol_overrides, bool force,
                       const std::string& output_override) {
    if (!doc.is_object()) bad("<root>", "expected a JSON object");
    RunConfig cfg;
    const json& cmd = need(doc, "command", "");
    if (!cmd.is_string()) bad("command", "expected a string");
    cfg.command = cmd.get<std::string>();
    if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
        bad("command", "unknown command '" + cfg.command + "'");

    const json& model = need(doc, "model", "");
    const json& energies = need(model, "energies", "model.");
    if (!energies.is_array()) bad("model.energies", "expected a list of integers");
    for (const auto& e : energies) {
        if (!e.is_number_integer()) bad("model.energies", "energies must be integers");
        cfg.energies.push_back(e.get<std::int64_t>());
    }
    if (model.contains("dim") && as_count(model.at("dim"), "model.dim") != cfg.energies.size())
        bad("model.dim", "does not match the number of energies");
    try {
        SingleParticleModel check(cfg.energies);
    } catch (const ValidationError& e) {
        bad("model.energies", e.what());
    }

    if (cfg.command != "ergodicity" && cfg.command != "steady-family") {
        cfg.spec = need(doc, "spec", "");
        if (!cfg.spec.is_string() && !(cfg.spec.is_object() && cfg.spec.contains("file")))
            bad("spec", "expected a spec name or {\"file\": path}");
    }
    if (doc.contains("params")) {
        cfg.params = doc.at("params");
        if (!cfg.params.is_object()) bad("params", "expected an object");
    }
    if (doc.contains("seed")) cfg.seed = as_count(doc.at("seed"), "seed");

    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        if (!t.is_object()) bad("tolerances", "expected an object");
        for (const auto& [name, value] : t.items()) {
            try {
                cfg.tol.set(name, as_double(value, "tolerances." + name));
            } catch (const std::invalid_argument& e) {
                bad("tolerances." + name, e.what());
            }
        }
    }
    for (const auto& [name, value] : tol_overrides) {
        try {
            cfg.tol.set(name, value);
        } catch (const std::invalid_argument& e) {
            bad("--tol " + name, e.what());
        }
    }

    if (!output_override.empty()) cfg.output_dir = output_override;
    else if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    else cfg.output_dir = ".";

    if (force) cfg.max_dim = std::numeric_limits<std::size_t>::max();

    json canon = doc;
    canon.erase("output_dir");
    canon["_effective_tolerances"] = cfg.tol.as_map();
    canon["_force"] = force;
    cfg.canonical = canon.dump();
    return cfg;
}

RunResult execute(const RunConfig& cfg) {
    Context ctx(cfg);
    if (cfg.command == "verify-spec") return cmd_verify_spec(ctx);
    if (cfg.command == "ergodicity") return cmd_ergodicity(ctx);
    if (cfg.command == "evolve-master") return cmd_evolve_master(ctx);
    if (cfg.command == "steady-states") return cmd_steady_states(ctx);
    if (cfg.command == "evolve-qkbe") return cmd_evolve_qkbe(ctx);
    if (cfg.command == "steady-family") return cmd_steady_family(ctx);
    if (cfg.command == "check-conserved") return cmd_check_conserved(ctx);
    if (cfg.command == "chaos") return cmd_chaos(ctx);
    if (cfg.command == "gap") return cmd_gap(ctx);
    bad("command", "unknown command '" + cfg.command + "'");
}

void write_outputs(const RunConfig& cfg, const RunResult& result) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ostringstream m;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical)));
    m << "command: " << cfg.command << "\n";
    m << "version: " << kVersion << "\n";
    m << "config_hash: fnv1a64:" << hash << "\n";
    m << "seed: " << cfg.seed << "\n";
    m << "timestamp: " << timestamp() << "\n";
    m << "max_dim: " << (cfg.max_dim == std::numeric_limits<std::size_t>::max() ? std::string("unbounded (--force)")
                                                                                : std::to_string(cfg.max_dim))
      << "\n";
    for (const auto& [name, value] : cfg.tol.as_map()) m << "tol." << name << ": " << shortest(value) << "\n";
    m << "output: " << result.csv_name << "\n";
    for (const auto& note : result.notes) m << "note: " << note << "\n";
    write_atomic(dir / result.csv_name, result.csv);
    write_atomic(dir / "manifest.txt", m.str());
}

int main_entry(int argc, const char* const* argv) {
    CLI::App app{"Quantum Kac model laboratory"};
    std::string config_path, output_dir;
    bool force = false;
    std::vector<std::string> tol_args;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--output", output_dir, "output directory (overrides output_dir in the config)");
    app.add_flag("--force", force, "lift the d^N <= 4096 size guard");
    app.add_option("--tol", tol_args, "tolerance override name=value (repeatable)");
    app.set_version_flag("--version", kVersion);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::map<std::string, double> tol;
        for (const auto& arg : tol_args) {
            const auto eq = arg.find('=');
            if (eq == std::string::npos) bad("--tol", "expected name=value, got '" + arg + "'");
            try {
                tol[arg.substr(0, eq)] = std::stod(arg.substr(eq + 1));
            } catch (const std::logic_error&) {
                bad("--tol", "cannot parse a number in '" + arg + "'");
            }
        }
        std::ifstream in(config_path);
        if (!in) bad("--config", "cannot open '" + config_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        if (buf.str().find_first_not_of(" \t\r\n") == std::string::npos) bad("--config", "file is empty");
        json doc;
        try {
            doc = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            bad("--config", std::string("not valid JSON: ") + e.what());
        }
        const RunConfig cfg = parse_config(doc, tol, force, output_dir);
        const RunResult result = execute(cfg);
        write_outputs(cfg, result);
        for (const auto& note : result.notes) std::cout << note << "\n";
        std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / result.csv_name).string() << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace qkac::cli

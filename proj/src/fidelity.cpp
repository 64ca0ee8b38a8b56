#include "ising_lab/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

namespace ising_lab {

namespace {

constexpr int max_dense_sites = 12;
const double max_step = std::atan(2.0);

Eigen::MatrixXd dense(const QuantumIsingParams& p, double s) {
    const auto flat = hamiltonian_matrix(p, s);
    const Eigen::Index d = static_cast<Eigen::Index>(std::size_t{1} << p.sites());
    return Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, d);
}

// e^{-i t H} for real symmetric H
Eigen::MatrixXcd evolution(const Eigen::MatrixXd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd phase(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) phase[k] = std::exp(cplx(0, -t * es.eigenvalues()[k]));
    return v * phase.asDiagonal() * v.adjoint();
}

double slice_edges(const Lattice& l) { return static_cast<double>(l.edge_count()); }

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

}  // namespace

// ---------------------------------------------------------------------------
// quantum model
// ---------------------------------------------------------------------------

void QuantumIsingParams::validate() const {
    if (!(h_perp > 0)) throw std::invalid_argument("QuantumIsingParams: h_perp must be positive");
    if (lattice.size() < 1) throw std::invalid_argument("QuantumIsingParams: empty lattice");
    if (!std::isfinite(J) || !std::isfinite(h)) throw std::invalid_argument("QuantumIsingParams: non-finite coupling");
}

double QuantumIsingParams::diagonal_scale() const {
    return std::abs(h) * lattice.size() + std::abs(J) * slice_edges(lattice);
}

std::vector<double> hamiltonian_matrix(const QuantumIsingParams& p, double s) {
    p.validate();
    const int n = p.sites();
    if (n > max_dense_sites) throw CapExceeded("hamiltonian_matrix: at most " + std::to_string(max_dense_sites) + " sites");
    const std::size_t d = std::size_t{1} << n;
    std::vector<double> m(d * d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double diag = 0;
        for (const auto& e : p.lattice.edges()) diag -= p.J * spin_of(c, e.a) * spin_of(c, e.b);
        for (int q = 0; q < n; ++q) diag -= p.h * spin_of(c, q);
        m[c + d * c] = s * diag;
        for (int q = 0; q < n; ++q) m[(c ^ (std::size_t{1} << q)) + d * c] -= p.h_perp;
    }
    return m;
}

double spectral_gap(const QuantumIsingParams& p, double s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(p, s), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[1] - es.eigenvalues()[0];
}

double minimum_gap(const QuantumIsingParams& p, int grid) {
    if (grid < 2) throw std::invalid_argument("minimum_gap: grid needs at least two points");
    int best = 0;
    double best_gap = spectral_gap(p, 0.0);
    for (int i = 1; i < grid; ++i) {
        const double g = spectral_gap(p, double(i) / (grid - 1));
        if (g < best_gap) {
            best_gap = g;
            best = i;
        }
    }
    const double lo = double(std::max(0, best - 1)) / (grid - 1);
    const double hi = double(std::min(grid - 1, best + 1)) / (grid - 1);
    const auto r = boost::math::tools::brent_find_minima([&](double s) { return spectral_gap(p, s); }, lo, hi, 40);
    return std::min(best_gap, r.second);
}

std::vector<cplx> ground_state(const QuantumIsingParams& p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(p, 1.0));
    Eigen::VectorXd v = es.eigenvectors().col(0);
    if (v.sum() < 0) v = -v;
    return {v.data(), v.data() + v.size()};
}

// ---------------------------------------------------------------------------
// adiabatic plan and Trotter circuit
// ---------------------------------------------------------------------------

void AdiabaticPlan::validate() const {
    if (L < 1) throw std::invalid_argument("AdiabaticPlan: need at least one step");
    if (!(T > 0)) throw std::invalid_argument("AdiabaticPlan: total time must be positive");
    if (std::abs(tau - T / L) > 1e-12 * T) throw std::invalid_argument("AdiabaticPlan: tau must equal T / L");
}

double adiabatic_time(const QuantumIsingParams& p, double delta, double gamma) {
    if (!(delta > 0) || !(gamma > 0)) throw std::invalid_argument("adiabatic_time: delta and gamma must be positive");
    const double c = p.diagonal_scale();
    return 1e5 / (delta * delta) * c * c * c / std::pow(gamma, 4);
}

double plan_deviation(const QuantumIsingParams& p, double T, int L, double delta, double K) {
    const double c = p.diagonal_scale(), tau = T / L;
    return delta + T * std::sqrt(2 * c / L) + K * L * c * p.h_perp * p.sites() * tau * tau;
}

AdiabaticPlan adiabatic_plan(const QuantumIsingParams& p, double delta, double gamma, int L, double K) {
    p.validate();
    if (L < 1) throw std::invalid_argument("adiabatic_plan: need at least one step");
    AdiabaticPlan plan;
    plan.T = adiabatic_time(p, delta, gamma);
    plan.L = L;
    plan.tau = plan.T / L;
    plan.gamma = gamma;
    plan.delta = delta;
    plan.K = K;
    plan.deviation = plan_deviation(p, plan.T, L, delta, K);
    return plan;
}

AdiabaticPlan fixed_time_plan(const QuantumIsingParams& p, double T, int L, double K) {
    p.validate();
    if (L < 1 || !(T > 0)) throw std::invalid_argument("fixed_time_plan: need T > 0 and L >= 1");
    AdiabaticPlan plan;
    plan.T = T;
    plan.L = L;
    plan.tau = T / L;
    plan.K = K;
    plan.deviation = plan_deviation(p, T, L, 0.0, K);
    return plan;
}

CircuitProgram trotter_circuit(const QuantumIsingParams& p, const AdiabaticPlan& plan) {
    p.validate();
    plan.validate();
    const int n = p.sites();
    const std::size_t edges = p.lattice.edge_count();
    CircuitProgram prog{p.lattice, {}};
    // G(theta) = e^{i theta/2} e^{-i theta/2 X}; theta = -2 tau h_perp gives
    // e^{+i tau h_perp X} = e^{-i tau H0} after removing the phase
    const double theta = -2 * plan.tau * p.h_perp;
    for (int k = 0; k < plan.L; ++k) {
        prog.layers.push_back(DiagonalLayer{plan.tau * k / plan.L, std::vector<cplx>(edges, p.J),
                                            std::vector<cplx>(n, p.h), {}});
        prog.layers.push_back(GLayer{std::vector<cplx>(n, theta)});
        prog.layers.push_back(DiagonalLayer{1.0, std::vector<cplx>(edges, 0.0), std::vector<cplx>(n, 0.0),
                                            std::vector<cplx>(n, -theta / 2)});
    }
    return prog;
}

CircuitProgram adjoint(const CircuitProgram& program) {
    CircuitProgram out{program.lattice, {}};
    auto real = [](cplx z) { return z.imag() == 0.0; };
    for (auto it = program.layers.rbegin(); it != program.layers.rend(); ++it) {
        if (const auto* d = std::get_if<DiagonalLayer>(&*it)) {
            const bool ok = real(d->alpha) && std::all_of(d->couplings.begin(), d->couplings.end(), real) &&
                            std::all_of(d->fields.begin(), d->fields.end(), real) &&
                            std::all_of(d->offsets.begin(), d->offsets.end(), real);
            if (!ok) throw std::invalid_argument("adjoint: diagonal layer has complex parameters");
            DiagonalLayer inv = *d;
            inv.alpha = -d->alpha;
            out.layers.push_back(std::move(inv));
        } else if (const auto* g = std::get_if<GLayer>(&*it)) {
            GLayer inv;
            for (auto t : g->angles) inv.angles.push_back(-std::conj(t));
            out.layers.push_back(std::move(inv));
        } else {
            throw std::invalid_argument("adjoint: only diagonal and G layers are supported");
        }
    }
    return out;
}

cplx statevector_overlap(const QuantumIsingParams& p, const AdiabaticPlan& plan, const QuantumIsingParams& q,
                         const AdiabaticPlan& qplan) {
    if (p.sites() != q.sites() || p.lattice.edges() != q.lattice.edges())
        throw std::invalid_argument("statevector_overlap: the two models must share a lattice");
    auto prog = trotter_circuit(p, plan);
    auto back = adjoint(trotter_circuit(q, qplan));
    for (auto& l : back.layers) prog.layers.push_back(std::move(l));
    return amplitude(prog);
}

double trotter_step_error(const QuantumIsingParams& p, double s, double tau) {
    const Eigen::MatrixXd h0 = dense(p, 0.0);
    const Eigen::MatrixXd h1 = dense(p, s) - h0;
    const Eigen::MatrixXcd split = evolution(h0, tau) * evolution(h1, tau);
    const Eigen::MatrixXcd exact = evolution(h0 + h1, tau);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(split - exact);
    return svd.singularValues()[0];
}

std::vector<double> fidelity_sweep(const QuantumIsingParams& p, std::span<const double> h_perp, double dh) {
    std::vector<double> out;
    for (double hp : h_perp) {
        auto a = p, b = p;
        a.h_perp = hp;
        b.h_perp = hp + dh;
        const auto ga = ground_state(a), gb = ground_state(b);
        cplx s = 0;
        for (std::size_t i = 0; i < ga.size(); ++i) s += std::conj(ga[i]) * gb[i];
        out.push_back(std::abs(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// transverse step as two transfer matrices
// ---------------------------------------------------------------------------

double transverse_epsilon(double a) {
    // |eps| < 1 (real couplings' logs) needs |tan a| < 2
    if (!(std::abs(std::tan(a)) < 2) || !(std::abs(a) < pi / 2))
        throw std::invalid_argument("transverse_epsilon: |tan a| must be below 2");
    if (a == 0) return 0.0;
    const double t = std::tan(a);
    // smaller root of eps^2 tan a + 2 eps - 2 tan a = 0, written without cancellation
    return 2 * t / (1 + std::sqrt(1 + 2 * t * t));
}

std::array<cplx, 2> transverse_couplings(double a) {
    const double e = transverse_epsilon(a);
    return {cplx(-0.5 * std::log1p(e), pi / 4), cplx(-0.5 * std::log1p(-e), -pi / 4)};
}

double transverse_scale(double epsilon) {
    const double e2 = epsilon * epsilon;
    return std::sqrt((1 - e2) / (e2 * e2 + 4));
}

CouplingVector beta_star(double tau, double h_perp, double tau_prime, double h_perp_prime, double J, double J_prime,
                         double T, double T_prime, int L, int L_prime) {
    const double a = tau * h_perp, ap = tau_prime * h_perp_prime;
    if (!(a > 0 && a < max_step) || !(ap > 0 && ap < max_step))
        throw std::invalid_argument("beta_star: tau h_perp must lie in (0, atan 2)");
    if (L < 1 || L_prime < 1) throw std::invalid_argument("beta_star: step counts must be positive");
    CouplingVector v;
    const auto u = transverse_couplings(-a);
    const auto w = transverse_couplings(ap);
    v.epsilon = transverse_epsilon(-a);
    v.epsilon_prime = transverse_epsilon(ap);
    v.beta = {u[0], u[1], w[0], w[1], cplx(0, J * T / (double(L) * L)), cplx(0, -J_prime * T_prime / (double(L_prime) * L_prime))};
    return v;
}

// ---------------------------------------------------------------------------
// slab
// ---------------------------------------------------------------------------

OverlapSlab overlap_slab(const Lattice& slice, int L, int L_prime, double field_ratio, double field_ratio_prime) {
    if (L < 1 || L_prime < 1) throw std::invalid_argument("overlap_slab: step counts must be positive");
    OverlapSlab s;
    s.slice = slice;
    s.L = L;
    s.L_prime = L_prime;
    s.field_ratio = field_ratio;
    s.field_ratio_prime = field_ratio_prime;
    const int slices = 2 * (L + L_prime) + 1;
    s.slice_axis.assign(slices, row);
    s.slice_mult.assign(slices, 0);
    for (int k = 0; k < L; ++k) {
        s.gap_axis.push_back(minus);
        s.gap_axis.push_back(plus);
        s.slice_mult[2 * k] = k;
    }
    for (int r = 0; r < L_prime; ++r) {
        s.gap_axis.push_back(plus_prime);
        s.gap_axis.push_back(minus_prime);
        s.slice_axis[2 * L + 2 * r + 2] = row_prime;
        s.slice_mult[2 * L + 2 * r + 2] = L_prime - 1 - r;
    }
    return s;
}

std::array<long long, 6> OverlapSlab::half_degrees() const {
    if (!is_integer(field_ratio) || !is_integer(field_ratio_prime))
        throw std::invalid_argument("half_degrees: field ratios must be integers for a polynomial form");
    const long long n = slice.size(), e = static_cast<long long>(slice.edge_count());
    std::array<long long, 6> m{};
    for (int a : gap_axis) m[a] += n;
    for (int t = 0; t < slices(); ++t) {
        const double r = slice_axis[t] == row ? field_ratio : field_ratio_prime;
        m[slice_axis[t]] += slice_mult[t] * (e + n * std::llround(std::abs(r)));
    }
    return m;
}

ComplexIsingModel slab_model(const OverlapSlab& slab, const std::array<cplx, 6>& beta) {
    const auto st = stack_slices(slab.slice, slab.slices());
    const int n = slab.slice.size();
    std::vector<cplx> j(st.lattice.edge_count(), 0.0), h(st.lattice.size(), 0.0);
    for (int t = 0; t < slab.slices(); ++t) {
        const cplx k = beta[slab.slice_axis[t]] * double(slab.slice_mult[t]);
        const double r = slab.slice_axis[t] == row ? slab.field_ratio : slab.field_ratio_prime;
        for (std::size_t e = 0; e < slab.slice.edge_count(); ++e) j[st.slice_edge[t][e]] = k;
        for (int i = 0; i < n; ++i) h[i + n * t] = k * r;
        if (t + 1 < slab.slices())
            for (int i = 0; i < n; ++i) j[st.vertical_edge[t][i]] = beta[slab.gap_axis[t]];
    }
    return ComplexIsingModel(st.lattice, std::move(j), std::move(h));
}

OverlapInstance overlap_instance(const QuantumIsingParams& p, const AdiabaticPlan& plan, const QuantumIsingParams& q,
                                 const AdiabaticPlan& qplan) {
    p.validate();
    q.validate();
    plan.validate();
    qplan.validate();
    if (p.sites() != q.sites() || p.lattice.edges() != q.lattice.edges())
        throw std::invalid_argument("overlap_instance: the two models must share a lattice");
    if (p.J == 0 || q.J == 0) throw std::invalid_argument("overlap_instance: J must be nonzero");
    OverlapInstance inst;
    inst.couplings = beta_star(plan.tau, p.h_perp, qplan.tau, q.h_perp, p.J, q.J, plan.T, qplan.T, plan.L, qplan.L);
    inst.slab = overlap_slab(p.lattice, plan.L, qplan.L, p.h / p.J, q.h / q.J);
    inst.model = slab_model(inst.slab, inst.couplings.beta);
    const int n = p.sites();
    inst.prefactor = std::pow(2.0, -n) * std::pow(transverse_scale(inst.couplings.epsilon), plan.L * n) *
                     std::pow(transverse_scale(inst.couplings.epsilon_prime), qplan.L * n);
    return inst;
}

cplx instance_overlap(const OverlapInstance& inst, const EnumerationOptions& opts) {
    if (inst.model.lattice.is_grid() && inst.model.size() > opts.max_sites)
        return inst.prefactor * transfer_boltzmann_sum(inst.model);
    return inst.prefactor * boltzmann_sum(inst.model, opts);
}

// ---------------------------------------------------------------------------
// mesh
// ---------------------------------------------------------------------------

MeshSpec MeshSpec::full(std::span<const int> degrees) {
    MeshSpec m;
    for (int d : degrees) {
        if (d < 0) throw std::invalid_argument("MeshSpec: negative degree");
        m.degree.push_back(d);
        std::vector<ExtReal> x;
        for (int i = 1; i <= d + 1; ++i) x.push_back(ExtReal(i) / ExtReal(d + 1));
        m.nodes.push_back(std::move(x));
    }
    return m;
}

MeshSpec MeshSpec::windowed(std::span<const int> degrees, std::span<const double> anchors, std::span<const double> widths) {
    if (anchors.size() != degrees.size() || widths.size() != degrees.size())
        throw std::invalid_argument("MeshSpec: one anchor and one width per axis");
    MeshSpec m;
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        const int d = degrees[j];
        if (d < 0) throw std::invalid_argument("MeshSpec: negative degree");
        m.degree.push_back(d);
        std::vector<ExtReal> x;
        for (int i = 1; i <= d + 1; ++i)
            x.push_back(d == 0 ? ExtReal(anchors[j]) : ExtReal(anchors[j]) + ExtReal(widths[j]) / d * (i - 1));
        m.nodes.push_back(std::move(x));
    }
    m.validate();
    return m;
}

std::size_t MeshSpec::size() const {
    std::size_t s = 1;
    for (int d : degree) s *= static_cast<std::size_t>(d + 1);
    return s;
}

void MeshSpec::validate() const {
    if (nodes.size() != degree.size()) throw std::invalid_argument("MeshSpec: node lists and degrees differ in count");
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (nodes[j].size() != static_cast<std::size_t>(degree[j] + 1))
            throw std::invalid_argument("MeshSpec: axis " + std::to_string(j) + " needs degree + 1 nodes");
        for (std::size_t a = 0; a < nodes[j].size(); ++a) {
            if (!(nodes[j][a] > 0) || nodes[j][a] > 1)
                throw std::invalid_argument("MeshSpec: nodes must lie in (0, 1]");
            for (std::size_t b = 0; b < a; ++b)
                if (nodes[j][a] == nodes[j][b]) throw std::invalid_argument("MeshSpec: duplicate nodes");
        }
    }
}

std::vector<int> slab_degrees(const OverlapSlab& slab) {
    std::vector<int> d;
    for (long long m : slab.half_degrees()) d.push_back(static_cast<int>(2 * m));
    return d;
}

CouplingSampler exact_slab_sampler(const OverlapSlab& slab) {
    const auto m = slab.half_degrees();
    const int n = slab.slice.size();
    if (n > 16) throw CapExceeded("exact_slab_sampler: slice too wide");
    const std::size_t states = std::size_t{1} << n;
    const long long e = static_cast<long long>(slab.slice.edge_count());
    // per slice and state: exponent of x_{row axis}
    std::vector<std::vector<long long>> power(slab.slices(), std::vector<long long>(states, 0));
    for (int t = 0; t < slab.slices(); ++t) {
        const long long r = std::llround(slab.slice_axis[t] == row ? slab.field_ratio : slab.field_ratio_prime);
        for (std::size_t c = 0; c < states; ++c) {
            long long g = 0, mag = 0;
            for (const auto& ed : slab.slice.edges()) g += spin_of(c, ed.a) * spin_of(c, ed.b);
            for (int i = 0; i < n; ++i) mag += spin_of(c, i);
            power[t][c] = slab.slice_mult[t] * (e + n * std::abs(r) - g - r * mag);
        }
    }
    return [slab, m, power, n, states](std::span<const ExtReal> x) {
        if (x.size() != 6) throw std::invalid_argument("exact_slab_sampler: expected six couplings");
        auto xpow = [&](int axis, long long p) { return p == 0 ? ExtReal(1) : ExtReal(pow(x[axis], p)); };
        std::vector<ExtReal> v(states);
        for (std::size_t c = 0; c < states; ++c) v[c] = xpow(slab.slice_axis[0], power[0][c]);
        for (int g = 0; g + 1 < slab.slices(); ++g) {
            const ExtReal w = x[slab.gap_axis[g]] * x[slab.gap_axis[g]];
            for (int q = 0; q < n; ++q) {
                const std::size_t bit = std::size_t{1} << q;
                for (std::size_t c = 0; c < states; ++c) {
                    if (c & bit) continue;
                    const ExtReal a = v[c], b = v[c | bit];
                    v[c] = a + w * b;
                    v[c | bit] = w * a + b;
                }
            }
            const int t = g + 1;
            for (std::size_t c = 0; c < states; ++c)
                if (power[t][c] != 0) v[c] *= xpow(slab.slice_axis[t], power[t][c]);
        }
        ExtReal p = 0;
        for (const auto& a : v) p += a;
        for (int j = 0; j < 6; ++j)
            if (m[j] != 0) p /= ExtReal(pow(x[j], m[j]));
        return p;
    };
}

ExtComplex mesh_reconstruct(const CouplingSampler& sampler, const MeshSpec& mesh, std::span<const cplx> target,
                            cplx prefactor, unsigned threads) {
    mesh.validate();
    const std::size_t axes = mesh.degree.size();
    if (target.size() != axes) throw std::invalid_argument("mesh_reconstruct: target and mesh differ in dimension");
    const std::size_t total = mesh.size();

    // B^{-1}(beta_i) Z(beta_i) at every node, axis 0 fastest
    std::vector<ExtComplex> values(total);
    parallel_for(total, threads, [&](std::size_t flat) {
        std::vector<ExtReal> x(axes);
        ExtReal binv = 1;
        std::size_t rest = flat;
        for (std::size_t j = 0; j < axes; ++j) {
            const std::size_t count = mesh.degree[j] + 1;
            x[j] = mesh.nodes[j][rest % count];
            rest /= count;
            if (mesh.degree[j] % 2 == 0)
                binv *= ExtReal(pow(x[j], mesh.degree[j] / 2));
            else
                binv *= ExtReal(pow(x[j], ExtReal(mesh.degree[j]) / 2));
        }
        values[flat] = ExtComplex(sampler(x) * binv);
    });

    ExtComplex b_target = 1;
    std::size_t len = total;
    for (std::size_t j = 0; j < axes; ++j) {
        const ExtComplex beta(target[j].real(), target[j].imag());
        const ExtComplex xs = exp(-beta);
        b_target *= exp(beta * ExtReal(mesh.degree[j]) / 2);
        const auto& nodes = mesh.nodes[j];
        const std::size_t count = nodes.size();
        std::vector<ExtComplex> w(count);
        for (std::size_t i = 0; i < count; ++i) {
            ExtComplex l = 1;
            for (std::size_t k = 0; k < count; ++k)
                if (k != i) l *= (xs - ExtComplex(nodes[k])) / ExtComplex(nodes[i] - nodes[k]);
            w[i] = l;
        }
        const std::size_t outer = len / count;
        std::vector<ExtComplex> next(outer);
        for (std::size_t o = 0; o < outer; ++o) {
            ExtComplex s = 0;
            for (std::size_t i = 0; i < count; ++i) s += w[i] * values[i + count * o];
            next[o] = s;
        }
        values = std::move(next);
        len = outer;
    }
    return ExtComplex(prefactor.real(), prefactor.imag()) * b_target * values[0];
}

// ---------------------------------------------------------------------------
// precision
// ---------------------------------------------------------------------------

double precision_g(double beta) {
    if (!(beta > 0)) throw std::invalid_argument("precision_g: beta must be positive");
    const double q = std::exp(-beta);
    return (1 - q) * std::log1p(-q) - beta * q - 7.0 / 8.0;
}

std::pair<double, double> precision_g_minimum() {
    return boost::math::tools::brent_find_minima(precision_g, 1e-3, 20.0, 50);
}

double log_precision_bound(const PrecisionInputs& in) {
    if (in.L < 2 || in.L_prime < 2) throw std::invalid_argument("log_precision_bound: needs L, L' >= 2");
    if (in.degree.size() != in.beta.size()) throw std::invalid_argument("log_precision_bound: one beta per axis");
    if (!in.window.empty() && in.window.size() != in.degree.size())
        throw std::invalid_argument("log_precision_bound: one window per axis");
    for (int d : in.degree)
        if (d <= 0) throw std::invalid_argument("log_precision_bound: degrees must be positive");
    double out = std::log(16.0 * in.T * in.T_prime * in.L * (in.L - 1.0) * in.L_prime * (in.L_prime - 1.0));
    if (in.window.empty()) {
        out += 6 * std::log(double(in.sites));
        for (std::size_t j = 0; j < in.degree.size(); ++j) out += (in.beta[j] / 2 - 1.6) * in.degree[j];
    } else {
        for (std::size_t j = 0; j < in.degree.size(); ++j) {
            if (!(in.window[j] > 0)) throw std::invalid_argument("log_precision_bound: windows must be positive");
            out += (in.beta[j] / 2 - 1 + std::log(in.window[j] / 2)) * in.degree[j];
        }
    }
    return out;
}

}  // namespace ising_lab

#include "ising_lab/circuit.hpp"

#include <algorithm>
#include <bit>

#include "ising_lab/rng.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// QuantumState
// ---------------------------------------------------------------------------

QuantumState::QuantumState(int qubits) : n_(qubits) {
    if (qubits < 0 || qubits > 30) throw std::invalid_argument("QuantumState: qubit count must be in [0, 30]");
    amps_.assign(std::size_t{1} << qubits, cplx(0));
    amps_[0] = 1.0;
}

QuantumState QuantumState::basis(int qubits, std::uint64_t index) {
    QuantumState s(qubits);
    if (index >= s.dimension()) throw std::out_of_range("QuantumState::basis: index out of range");
    s.amps_[0] = 0;
    s.amps_[index] = 1;
    return s;
}

QuantumState QuantumState::plus(int qubits) {
    QuantumState s(qubits);
    const double a = 1.0 / std::sqrt(static_cast<double>(s.dimension()));
    std::fill(s.amps_.begin(), s.amps_.end(), cplx(a));
    return s;
}

QuantumState QuantumState::from_amplitudes(std::vector<cplx> amps) {
    const std::size_t d = amps.size();
    if (d == 0 || (d & (d - 1)) != 0) throw std::invalid_argument("QuantumState: dimension must be a power of two");
    QuantumState s(std::countr_zero(d));
    s.amps_ = std::move(amps);
    return s;
}

double QuantumState::norm() const {
    CompensatedSum<double> acc;
    for (const auto& a : amps_) acc.add(std::norm(a));
    return std::sqrt(acc.value());
}

cplx QuantumState::inner(const QuantumState& ket) const {
    if (ket.n_ != n_) throw std::invalid_argument("inner: qubit counts differ");
    CompensatedSum<cplx> acc;
    for (std::size_t i = 0; i < amps_.size(); ++i) acc.add(std::conj(amps_[i]) * ket.amps_[i]);
    return acc.value();
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

namespace {

constexpr cplx I{0.0, 1.0};

void check_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                                    std::to_string(got));
}

// m acts on bit `target` of every basis index; with a control mask the gate
// only touches indices where all control bits are set
void apply_single(std::span<cplx> amps, int target, const Matrix2& m, std::uint64_t control = 0) {
    const std::uint64_t tb = std::uint64_t{1} << target;
    for (std::uint64_t s = 0; s < amps.size(); ++s) {
        if ((s & tb) || (s & control) != control) continue;
        const cplx a0 = amps[s], a1 = amps[s | tb];
        amps[s] = m[0][0] * a0 + m[0][1] * a1;
        amps[s | tb] = m[1][0] * a0 + m[1][1] * a1;
    }
}

Matrix2 phase_matrix(cplx phi) { return {{{std::exp(I * phi), 0.0}, {0.0, std::exp(-I * phi)}}}; }

}  // namespace

Matrix2 rotation_matrix(cplx theta) {
    const cplx c = std::cos(theta), s = std::sin(theta);
    return {{{c, -s}, {s, c}}};
}

Matrix2 g_matrix(cplx theta) {
    const cplx u = std::exp(I * theta);
    return {{{0.5 * (1.0 + u), 0.5 * (1.0 - u)}, {0.5 * (1.0 - u), 0.5 * (1.0 + u)}}};
}

cplx rotation_coupling(cplx theta) { return -0.5 * std::log(std::tan(theta)) - I * (pi / 4); }

cplx rotation_offset(cplx theta) {
    return 0.5 * std::log(std::cos(theta)) + 0.5 * std::log(std::sin(theta)) + I * (pi / 4);
}

void apply_diagonal_layer(QuantumState& state, const Lattice& lattice, const DiagonalLayer& layer) {
    check_length(layer.couplings.size(), lattice.edge_count(), "diagonal layer couplings");
    check_length(layer.fields.size(), static_cast<std::size_t>(lattice.size()), "diagonal layer fields");
    if (!layer.offsets.empty())
        check_length(layer.offsets.size(), static_cast<std::size_t>(lattice.size()), "diagonal layer offsets");
    if (state.qubits() != lattice.size()) throw std::invalid_argument("diagonal layer: qubit count mismatch");
    cplx offset = 0;
    for (const auto& k : layer.offsets) offset += k;
    const auto& edges = lattice.edges();
    auto amps = state.amplitudes();
    for (std::uint64_t s = 0; s < amps.size(); ++s) {
        cplx x = offset;
        for (std::size_t e = 0; e < edges.size(); ++e)
            x += layer.couplings[e] * double(spin_of(s, edges[e].a) * spin_of(s, edges[e].b));
        for (int i = 0; i < lattice.size(); ++i) x += layer.fields[i] * double(spin_of(s, i));
        amps[s] *= std::exp(I * layer.alpha * x);
    }
}

void apply_rotation_layer(QuantumState& state, const RotationLayer& layer) {
    check_length(layer.angles.size(), static_cast<std::size_t>(state.qubits()), "rotation layer angles");
    for (int q = 0; q < state.qubits(); ++q)
        if (layer.angles[q] != cplx(0)) apply_single(state.amplitudes(), q, rotation_matrix(layer.angles[q]));
}

void apply_phase_layer(QuantumState& state, const PhaseLayer& layer) {
    check_length(layer.angles.size(), static_cast<std::size_t>(state.qubits()), "phase layer angles");
    for (int q = 0; q < state.qubits(); ++q)
        if (layer.angles[q] != cplx(0)) apply_single(state.amplitudes(), q, phase_matrix(layer.angles[q]));
}

void apply_g_layer(QuantumState& state, const GLayer& layer) {
    check_length(layer.angles.size(), static_cast<std::size_t>(state.qubits()), "G layer angles");
    for (int q = 0; q < state.qubits(); ++q)
        if (layer.angles[q] != cplx(0)) apply_single(state.amplitudes(), q, g_matrix(layer.angles[q]));
}

void apply_layer(QuantumState& state, const Lattice& lattice, const Layer& layer) {
    std::visit(
        [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DiagonalLayer>)
                apply_diagonal_layer(state, lattice, l);
            else if constexpr (std::is_same_v<L, RotationLayer>)
                apply_rotation_layer(state, l);
            else if constexpr (std::is_same_v<L, PhaseLayer>)
                apply_phase_layer(state, l);
            else
                apply_g_layer(state, l);
        },
        layer);
}

void validate(const CircuitProgram& program) {
    const std::size_t n = static_cast<std::size_t>(program.qubits());
    for (std::size_t k = 0; k < program.layers.size(); ++k) {
        const std::string where = "layer " + std::to_string(k);
        std::visit(
            [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, DiagonalLayer>) {
                    check_length(l.couplings.size(), program.lattice.edge_count(), (where + " couplings").c_str());
                    check_length(l.fields.size(), n, (where + " fields").c_str());
                    if (!l.offsets.empty()) check_length(l.offsets.size(), n, (where + " offsets").c_str());
                } else {
                    check_length(l.angles.size(), n, (where + " angles").c_str());
                }
            },
            program.layers[k]);
    }
}

void apply_program(QuantumState& state, const CircuitProgram& program) {
    if (state.qubits() != program.qubits()) throw std::invalid_argument("apply_program: qubit count mismatch");
    for (const auto& layer : program.layers) apply_layer(state, program.lattice, layer);
}

cplx amplitude(const CircuitProgram& program, const SimulationOptions& opts) {
    if (program.qubits() > opts.max_qubits)
        throw CapExceeded("amplitude: " + std::to_string(program.qubits()) + " qubits exceeds cap " +
                          std::to_string(opts.max_qubits));
    validate(program);
    auto psi = QuantumState::plus(program.qubits());
    apply_program(psi, program);
    return QuantumState::plus(program.qubits()).inner(psi);
}

cplx trace_amplitude(const CircuitProgram& program, const SimulationOptions& opts) {
    if (program.qubits() > opts.max_trace_qubits)
        throw CapExceeded("trace_amplitude: " + std::to_string(program.qubits()) + " qubits exceeds cap " +
                          std::to_string(opts.max_trace_qubits));
    validate(program);
    const std::uint64_t dim = std::uint64_t{1} << program.qubits();
    std::vector<cplx> diag(dim);
    for (std::uint64_t s = 0; s < dim; ++s) {
        auto col = QuantumState::basis(program.qubits(), s);
        apply_program(col, program);
        diag[s] = col[s];
    }
    return tree_sum(std::move(diag)) / static_cast<double>(dim);
}

// ---------------------------------------------------------------------------
// Layered programs
// ---------------------------------------------------------------------------

void validate(const LayeredSpec& spec) {
    const int m = spec.slices();
    const std::size_t n = static_cast<std::size_t>(spec.lattice.size());
    if (m < 1) throw std::invalid_argument("layered program: need at least one slice");
    check_length(spec.couplings.size(), static_cast<std::size_t>(m), "layered couplings slices");
    check_length(spec.fields.size(), static_cast<std::size_t>(m), "layered fields slices");
    if (!spec.offsets.empty()) check_length(spec.offsets.size(), static_cast<std::size_t>(m), "layered offsets slices");
    check_length(spec.angles.size(), static_cast<std::size_t>(m - 1), "layered angle slices");
    for (int t = 0; t < m; ++t) {
        check_length(spec.couplings[t].size(), spec.lattice.edge_count(), "layered couplings");
        check_length(spec.fields[t].size(), n, "layered fields");
        if (!spec.offsets.empty() && !spec.offsets[t].empty()) check_length(spec.offsets[t].size(), n, "layered offsets");
    }
    for (const auto& a : spec.angles) check_length(a.size(), n, "layered angles");
}

CircuitProgram layered_program(const LayeredSpec& spec) {
    validate(spec);
    const int n = spec.lattice.size(), m = spec.slices();
    CircuitProgram p{spec.lattice, {}};
    auto slice = [&](int t) {
        return DiagonalLayer{spec.alpha[t], spec.couplings[t], spec.fields[t],
                             spec.offsets.empty() ? std::vector<cplx>{} : spec.offsets[t]};
    };
    for (int t = 0; t + 1 < m; ++t) {
        p.layers.push_back(slice(t));
        p.layers.push_back(PhaseLayer{std::vector<cplx>(n, pi / 4)});
        p.layers.push_back(RotationLayer{spec.angles[t]});
        p.layers.push_back(PhaseLayer{std::vector<cplx>(n, -pi / 4)});
    }
    p.layers.push_back(slice(m - 1));
    return p;
}

EnlargedInstance enlarged_instance(const LayeredSpec& spec) {
    validate(spec);
    const int n = spec.lattice.size(), m = spec.slices();
    const auto st = stack_slices(spec.lattice, m);
    std::vector<cplx> couplings(st.lattice.edge_count());
    std::vector<cplx> fields(static_cast<std::size_t>(n) * m);
    cplx prefactor = std::pow(2.0, -n);
    for (int t = 0; t < m; ++t) {
        const cplx ia = I * spec.alpha[t];
        for (std::size_t e = 0; e < spec.lattice.edge_count(); ++e) couplings[st.slice_edge[t][e]] = ia * spec.couplings[t][e];
        for (int i = 0; i < n; ++i) fields[i + n * t] = ia * spec.fields[t][i];
        if (!spec.offsets.empty())
            for (const auto& k : spec.offsets[t]) prefactor *= std::exp(ia * k);
    }
    for (int t = 0; t + 1 < m; ++t)
        for (int i = 0; i < n; ++i) {
            couplings[st.vertical_edge[t][i]] = rotation_coupling(spec.angles[t][i]);
            prefactor *= std::exp(rotation_offset(spec.angles[t][i]));
        }
    return {ComplexIsingModel(st.lattice, std::move(couplings), std::move(fields)), prefactor};
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

std::vector<std::int8_t> sample_register(int register_size, double target, std::uint64_t shots, std::uint64_t seed,
                                         std::uint64_t stream, unsigned threads) {
    if (register_size < 1) throw std::invalid_argument("sample_register: register must hold at least one qubit");
    if (!(std::abs(target) <= 1.0 + 1e-9))
        throw std::invalid_argument("sample_register: expectation " + std::to_string(target) + " outside [-1, 1]");
    target = std::clamp(target, -1.0, 1.0);
    const CounterRng rng(seed, stream);
    std::vector<std::int8_t> out(shots);
    constexpr std::uint64_t block = 4096;
    const std::uint64_t blocks = (shots + block - 1) / block;
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::uint64_t end = std::min<std::uint64_t>(shots, (b + 1) * block);
        for (std::uint64_t shot = b * block; shot < end; ++shot) {
            const std::uint64_t base = shot * static_cast<std::uint64_t>(register_size);
            int parity = 1;
            for (int j = 0; j + 1 < register_size; ++j) parity *= rng.sign(base + j, 0.5);
            const int last = rng.sign(base + register_size - 1, 0.5 * (1.0 + parity * target));
            out[shot] = static_cast<std::int8_t>(parity * last);
        }
    });
    return out;
}

namespace {

std::pair<double, double> mean_and_error(const std::vector<std::int8_t>& v) {
    double s = 0;
    for (auto x : v) s += x;
    const double n = static_cast<double>(v.size());
    const double mean = s / n;
    const double var = v.size() > 1 ? (n - n * mean * mean) / (n - 1) : 0.0;  // x^2 = 1
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

}  // namespace

ProtocolEstimate simulate_protocol(const CircuitProgram& program, Protocol which, std::uint64_t shots,
                                   std::uint64_t seed, const ProtocolOptions& opts) {
    if (shots < 1) throw std::invalid_argument("simulate_protocol: shots must be >= 1");
    if (opts.trace && which != Protocol::overlap)
        throw std::invalid_argument("simulate_protocol: the trace variant needs protocol 2");
    const cplx a = opts.trace ? trace_amplitude(program, opts.sim) : amplitude(program, opts.sim);
    const int r = std::max(program.qubits(), 1);
    ProtocolEstimate est;
    if (which == Protocol::squared_overlap) {
        est.exact = std::norm(a);
        est.shots.push_back(sample_register(r, std::norm(a), shots, seed, 0, opts.threads));
        auto [m, se] = mean_and_error(est.shots[0]);
        est.value = m;
        est.standard_error = {se};
    } else {
        est.exact = a;
        est.shots.push_back(sample_register(r, a.real(), shots, seed, 0, opts.threads));
        est.shots.push_back(sample_register(r, a.imag(), shots, seed, 1, opts.threads));
        auto [mx, sx] = mean_and_error(est.shots[0]);
        auto [my, sy] = mean_and_error(est.shots[1]);
        est.value = {mx, my};
        est.standard_error = {sx, sy};
    }
    return est;
}

// ---------------------------------------------------------------------------
// Full-register validation
// ---------------------------------------------------------------------------

namespace {

constexpr int kFullRegisterCap = 4;

// GHZ on the register bits [offset, offset + n) times the system state on the low bits
std::vector<cplx> with_ghz(int offset, int n, std::span<const cplx> system) {
    std::vector<cplx> amps(std::size_t{1} << (offset + n));
    const std::uint64_t all = ((std::uint64_t{1} << n) - 1) << offset;
    const double r = 1.0 / std::sqrt(2.0);
    for (std::uint64_t s = 0; s < system.size(); ++s) {
        amps[s] += r * system[s];
        amps[s | all] += r * system[s];
    }
    return amps;
}

}  // namespace

double full_register_protocol1(const CircuitProgram& program) {
    const int n = program.qubits();
    if (n < 1 || n > kFullRegisterCap) throw CapExceeded("full-register protocol 1 supports 1..4 qubits");
    auto psi = QuantumState::plus(n);
    apply_program(psi, program);
    const auto phi = QuantumState::plus(n);
    // bits [0, n) = A, [n, 2n) = B, [2n, 3n) = R
    std::vector<cplx> ab(std::size_t{1} << (2 * n));
    for (std::uint64_t a = 0; a < psi.dimension(); ++a)
        for (std::uint64_t b = 0; b < phi.dimension(); ++b) ab[a | (b << n)] = psi[a] * phi[b];
    const auto big = with_ghz(2 * n, n, ab);
    // controlled swaps
    std::vector<cplx> out(big.size());
    for (std::uint64_t s = 0; s < big.size(); ++s) {
        std::uint64_t t = s;
        for (int j = 0; j < n; ++j)
            if ((s >> (2 * n + j)) & 1u) {
                const std::uint64_t aj = (s >> j) & 1u, bj = (s >> (n + j)) & 1u;
                if (aj != bj) t ^= (std::uint64_t{1} << j) | (std::uint64_t{1} << (n + j));
            }
        out[t] = big[s];
    }
    const std::uint64_t rmask = ((std::uint64_t{1} << n) - 1) << (2 * n);
    cplx e = 0;
    for (std::uint64_t s = 0; s < out.size(); ++s) e += std::conj(out[s]) * out[s ^ rmask];
    return e.real();
}

cplx full_register_protocol2(const CircuitProgram& program) {
    const int n = program.qubits();
    if (n < 1 || n > kFullRegisterCap) throw CapExceeded("full-register protocol 2 supports 1..4 qubits");
    validate(program);
    // bits [0, n) = A, [n, 2n) = R; every gate on A is controlled by a register
    // qubit: site gates by R_k, bonds by the register qubit of their first endpoint
    const auto plus = QuantumState::plus(n);
    auto big = with_ghz(n, n, plus.amplitudes());
    auto ctrl = [n](int site) { return std::uint64_t{1} << (n + site); };
    const auto& edges = program.lattice.edges();
    for (const auto& layer : program.layers) {
        if (const auto* d = std::get_if<DiagonalLayer>(&layer)) {
            for (std::uint64_t s = 0; s < big.size(); ++s) {
                cplx x = 0;
                for (std::size_t e = 0; e < edges.size(); ++e)
                    if (s & ctrl(edges[e].a)) x += d->couplings[e] * double(spin_of(s, edges[e].a) * spin_of(s, edges[e].b));
                for (int i = 0; i < n; ++i)
                    if (s & ctrl(i)) {
                        x += d->fields[i] * double(spin_of(s, i));
                        if (!d->offsets.empty()) x += d->offsets[i];
                    }
                big[s] *= std::exp(I * d->alpha * x);
            }
            continue;
        }
        std::vector<Matrix2> gates;
        if (const auto* r = std::get_if<RotationLayer>(&layer))
            for (auto a : r->angles) gates.push_back(rotation_matrix(a));
        else if (const auto* p = std::get_if<PhaseLayer>(&layer))
            for (auto a : p->angles) gates.push_back(phase_matrix(a));
        else
            for (auto a : std::get<GLayer>(layer).angles) gates.push_back(g_matrix(a));
        for (int q = 0; q < n; ++q) apply_single(big, q, gates[q], ctrl(q));
    }
    const std::uint64_t rmask = ((std::uint64_t{1} << n) - 1) << n;
    const std::uint64_t last = std::uint64_t{1} << (2 * n - 1);
    cplx ex = 0, ey = 0;
    for (std::uint64_t s = 0; s < big.size(); ++s) {
        const std::uint64_t t = s ^ rmask;
        ex += std::conj(big[t]) * big[s];
        // sigma^y on the last register qubit: |0> -> i|1>, |1> -> -i|0>
        const cplx y = (s & last) ? -I : I;
        ey += std::conj(big[t]) * y * big[s];
    }
    return {ex.real(), ey.real()};
}

}  // namespace ising_lab

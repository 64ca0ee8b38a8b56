#include "ising_lab/bqp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ising_lab/io.hpp"

namespace ising_lab {

namespace {

const cplx I{0, 1};

using Mat2 = std::array<cplx, 4>;  // row-major

Mat2 pauli_exp(PauliAxis a, double theta) {
    // exp(i theta/2 P) = cos(theta/2) + i sin(theta/2) P
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    switch (a) {
        case PauliAxis::x: return {c, I * s, I * s, c};
        case PauliAxis::y: return {c, s, -s, c};
        case PauliAxis::z: return {c + I * s, 0, 0, c - I * s};
    }
    return {};
}

void apply_1q(std::vector<cplx>& psi, int q, const Mat2& u) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < psi.size(); ++i)
        if (!(i & bit)) {
            const cplx a = psi[i], b = psi[i | bit];
            psi[i] = u[0] * a + u[1] * b;
            psi[i | bit] = u[2] * a + u[3] * b;
        }
}

void apply_all(std::vector<cplx>& psi, int qubits, const Mat2& u) {
    for (int q = 0; q < qubits; ++q) apply_1q(psi, q, u);
}

void apply_cp(std::vector<cplx>& psi, int qubits) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
        int flips = 0;
        for (int q = 0; q + 1 < qubits; ++q) flips += ((i >> q) & 1u) && ((i >> (q + 1)) & 1u);
        if (flips % 2) psi[i] = -psi[i];
    }
}

const Mat2 standard_h{1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), -1 / std::sqrt(2.0)};

void apply_gate(std::vector<cplx>& psi, int qubits, const GlobalGate& g) {
    switch (g.kind) {
        case GateKind::cp: apply_cp(psi, qubits); break;
        case GateKind::sigma: apply_all(psi, qubits, pauli_exp(g.axis, g.theta)); break;
        case GateKind::hadamard: {
            Mat2 h = standard_h;
            for (auto& x : h) x *= I;
            apply_all(psi, qubits, h);
            break;
        }
        case GateKind::shift:
            if (g.power < 0) throw std::invalid_argument("shift power must be non-negative");
            for (int p = 0; p < g.power; ++p) {
                apply_cp(psi, qubits);
                apply_all(psi, qubits, pauli_exp(PauliAxis::y, pi / 2));
                apply_all(psi, qubits, pauli_exp(PauliAxis::z, pi));
            }
            break;
    }
}

void append(GlobalSequence& out, const GlobalSequence& more) { out.insert(out.end(), more.begin(), more.end()); }

// G^{a} Sy G Sy G^{b} in application order (G^b first)
GlobalSequence reflector(int a, int b) {
    const auto sy = GlobalGate::rotation(PauliAxis::y, pi);
    return {GlobalGate::shift(b), sy, GlobalGate::shift(1), sy, GlobalGate::shift(a)};
}

GlobalSequence compile_z(int k, int N, double alpha) {
    const auto w = reflector(N - k, k);
    GlobalSequence s{GlobalGate::rotation(PauliAxis::z, alpha / 2)};
    append(s, w);
    s.push_back(GlobalGate::rotation(PauliAxis::z, -alpha / 2));
    append(s, w);
    return s;
}

GlobalSequence compile_x(int k, int N, double alpha) {
    const auto w = reflector(k, N - k);
    auto zt = [](double t) { return GlobalGate::rotation(PauliAxis::z, t); };
    auto yt = [](double t) { return GlobalGate::rotation(PauliAxis::y, t); };
    GlobalSequence s{zt(pi / 2), yt(-alpha / 2), zt(-pi / 2)};
    append(s, w);
    append(s, {zt(pi / 2), yt(alpha / 2), zt(-pi / 2)});
    append(s, w);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

GlobalSequence compile_logical(const LogicalGate& gate, int n) {
    if (n < 1) throw std::invalid_argument("compile_logical: need at least one logical qubit");
    const int k = gate.qubit, N = 2 * n;
    if (k < 1 || k > n) throw std::invalid_argument("compile_logical: qubit " + std::to_string(k) + " out of range 1.." + std::to_string(n));
    switch (gate.kind) {
        case LogicalGate::Kind::z: return compile_z(k, N, gate.alpha);
        case LogicalGate::Kind::x: return compile_x(k, N, gate.alpha);
        case LogicalGate::Kind::v: {
            if (k + 1 > n) throw std::invalid_argument("compile_logical: v gate needs qubit k + 1 <= n");
            // conjugate the x rotation on logical qubit 1 by shifts; G has order 2N + 2
            GlobalSequence s{GlobalGate::shift(2 * N + 2 - k)};
            append(s, compile_x(1, N, 2 * gate.alpha));
            s.push_back(GlobalGate::shift(k));
            return s;
        }
        case LogicalGate::Kind::hadamard: {
            GlobalSequence s = compile_z(k, N, pi / 2);
            append(s, compile_x(k, N, pi / 2));
            append(s, compile_z(k, N, pi / 2));
            return s;
        }
    }
    return {};
}

std::vector<cplx> global_unitary(std::span<const GlobalGate> sequence, int qubits) {
    if (qubits < 1 || qubits > 10) throw std::invalid_argument("global_unitary: qubit count must be in 1..10");
    const std::size_t dim = std::size_t{1} << qubits;
    std::vector<cplx> out(dim * dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<cplx> psi(dim, 0.0);
        psi[c] = 1;
        for (const auto& g : sequence) apply_gate(psi, qubits, g);
        std::copy(psi.begin(), psi.end(), out.begin() + c * dim);
    }
    return out;
}

std::vector<cplx> logical_target(const LogicalGate& gate, int n) {
    const int N = 2 * n, k = gate.qubit;
    if (k < 1 || k > n) throw std::invalid_argument("logical_target: qubit out of range");
    const int a = k - 1, m = N - k;  // physical qubit and its mirror
    const std::size_t dim = std::size_t{1} << N;
    std::vector<cplx> out(dim * dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<cplx> psi(dim, 0.0);
        psi[c] = 1;
        switch (gate.kind) {
            case LogicalGate::Kind::z:
                apply_1q(psi, a, pauli_exp(PauliAxis::z, gate.alpha));
                apply_1q(psi, m, pauli_exp(PauliAxis::z, gate.alpha));
                break;
            case LogicalGate::Kind::x:
                apply_1q(psi, a, pauli_exp(PauliAxis::x, gate.alpha));
                apply_1q(psi, m, pauli_exp(PauliAxis::x, gate.alpha));
                break;
            case LogicalGate::Kind::hadamard:
                apply_1q(psi, a, standard_h);
                apply_1q(psi, m, standard_h);
                break;
            case LogicalGate::Kind::v: {
                if (k + 1 > n) throw std::invalid_argument("logical_target: v gate needs qubit k + 1 <= n");
                // exp(i alpha Z_a X_b) = cos alpha + i sin alpha Z_a X_b on two disjoint pairs
                auto zx = [&](int za, int xb) {
                    std::vector<cplx> t(dim);
                    for (std::size_t i = 0; i < dim; ++i) {
                        const std::size_t j = i ^ (std::size_t{1} << xb);
                        t[j] += ((i >> za) & 1u ? -1.0 : 1.0) * psi[i];
                    }
                    for (std::size_t i = 0; i < dim; ++i) psi[i] = std::cos(gate.alpha) * psi[i] + I * std::sin(gate.alpha) * t[i];
                };
                zx(a, a + 1);
                zx(m, m - 1);
                break;
            }
        }
        std::copy(psi.begin(), psi.end(), out.begin() + c * dim);
    }
    return out;
}

double distance_up_to_phase(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw std::invalid_argument("distance_up_to_phase: size mismatch");
    cplx overlap = 0;
    for (std::size_t i = 0; i < a.size(); ++i) overlap += std::conj(b[i]) * a[i];
    const cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : 1.0;
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - phase * b[i]));
    return worst;
}

// ---------------------------------------------------------------------------
// T operators
// ---------------------------------------------------------------------------

std::vector<TOperator> lower_to_t_operators(std::span<const GlobalGate> sequence) {
    std::vector<TOperator> out{TOperator{false, false, false}};
    // a diagonal factor that is already taken in the current operator is
    // moved into a fresh pair of Hadamard-led operators (H H = 1)
    auto add = [&](bool TOperator::*slot) {
        if (out.back().*slot) {
            out.push_back({false, false, true});
            out.push_back({false, false, true});
        }
        out.back().*slot = true;
    };
    for (const auto& g : sequence) {
        switch (g.kind) {
            case GateKind::cp: add(&TOperator::cp); break;
            case GateKind::hadamard: out.push_back({false, false, true}); break;
            case GateKind::sigma: {
                const double units = g.theta / (pi / 8);
                if (g.axis != PauliAxis::z || std::abs(units - std::round(units)) > 1e-9)
                    throw std::invalid_argument("lower_to_t_operators: only z rotations by multiples of pi/8 lower to T operators");
                const long long k = ((std::llround(units) % 32) + 32) % 32;
                for (long long r = 0; r < k; ++r) add(&TOperator::phase);
                break;
            }
            case GateKind::shift:
                throw std::invalid_argument("lower_to_t_operators: shift gates must be expanded first");
        }
    }
    return out;
}

cplx t_sequence_amplitude(std::span<const TOperator> ops, int n) {
    if (n < 1 || 2 * n > 24) throw std::invalid_argument("t_sequence_amplitude: logical qubit count out of range");
    const int N = 2 * n;
    const std::size_t dim = std::size_t{1} << N;
    std::vector<cplx> psi(dim, 1 / std::sqrt(double(dim)));
    for (const auto& t : ops) {
        if (t.hadamard) apply_all(psi, N, standard_h);
        if (t.phase) apply_all(psi, N, pauli_exp(PauliAxis::z, pi / 8));
        if (t.cp) apply_cp(psi, N);
    }
    cplx total = 0;
    for (auto x : psi) total += x;
    return total / std::sqrt(double(dim));
}

// ---------------------------------------------------------------------------
// Ising instance
// ---------------------------------------------------------------------------

double IsingInstance::conventional_normalization() const { return std::pow(2.0, -double(logical_qubits) * (steps + 2)); }

IsingInstance circuit_to_ising(std::span<const TOperator> ops, int n) {
    if (ops.empty()) throw std::invalid_argument("circuit_to_ising: empty operator sequence");
    if (n < 1) throw std::invalid_argument("circuit_to_ising: need at least one logical qubit");
    if (ops.front().hadamard) throw std::invalid_argument("circuit_to_ising: the first operator carries no Hadamard");
    for (std::size_t s = 1; s < ops.size(); ++s)
        if (!ops[s].hadamard) throw std::invalid_argument("circuit_to_ising: operator " + std::to_string(s) + " must carry a Hadamard");
    const int N = 2 * n, M = static_cast<int>(ops.size());
    // With spins s = 2b - 1, (-1)^{b b'} = e^{i pi/4} e^{i pi/4 (s + s' + s s')},
    // which is coupling 4 and field 4 on both ends in exp(-i pi H / 16).
    // sigma_z(pi/8) gives e^{-i pi s / 16}, a field of -1.
    std::vector<Edge> edges;
    std::vector<double> j;
    std::vector<long long> h(static_cast<std::size_t>(N) * M, 0);
    cplx prefactor = std::pow(2.0, -double(n) * (M + 1));
    const cplx eighth = std::exp(I * (pi / 4));
    auto bond = [&](int a, int b) {
        edges.push_back({a, b});
        j.push_back(4);
        h[a] += 4;
        h[b] += 4;
        prefactor *= eighth;
    };
    for (int s = 0; s < M; ++s) {
        if (s > 0)
            for (int q = 0; q < N; ++q) bond(q + N * (s - 1), q + N * s);
        if (ops[s].cp)
            for (int q = 0; q + 1 < N; ++q) bond(q + N * s, q + 1 + N * s);
        if (ops[s].phase)
            for (int q = 0; q < N; ++q) h[q + N * s] -= 1;
    }
    // e^{i pi h s / 16} depends on h mod 16 up to (-1)^{(h - r)/16}; the
    // spin flip s -> -s maps h to -h, so keep whichever labelling is smaller
    auto reduce = [](const std::vector<long long>& f, int& sign) {
        std::vector<long long> r(f.size());
        long long total = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const long long a = (f[i] >= 0 ? f[i] / 16 : -((-f[i] + 15) / 16));
            r[i] = f[i] - 16 * a;
            if (a % 2) sign = -sign;
            total += r[i];
        }
        return std::pair{r, total};
    };
    int sign_plain = 1, sign_flip = 1;
    auto [plain, sum_plain] = reduce(h, sign_plain);
    std::vector<long long> neg(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) neg[i] = -h[i];
    auto [flipped, sum_flip] = reduce(neg, sign_flip);
    const bool flip = sum_flip < sum_plain;
    const auto& fields = flip ? flipped : plain;
    prefactor *= double(flip ? sign_flip : sign_plain);

    IsingInstance out;
    out.model = IsingModel(Lattice::irregular(N * M, edges), j, std::vector<double>(fields.begin(), fields.end()));
    out.prefactor = prefactor;
    out.logical_qubits = n;
    out.steps = M;
    out.mprime = 4 * static_cast<long long>(edges.size());
    for (auto f : fields) out.mprime += f;
    return out;
}

long long mprime_bound(int n, int M) {
    if (n < 1 || M < 1) throw std::invalid_argument("mprime_bound: n and M must be at least 1");
    return 50LL * n * M - 12LL * M - 24LL * n;
}

// ---------------------------------------------------------------------------
// Lagrange reconstruction
// ---------------------------------------------------------------------------

namespace {

template <class R, class C>
C barycentric(std::span<const R> x, std::span<const C> y, const C& z) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("lagrange_estimate: need matching, non-empty nodes and values");
    const std::size_t K = x.size();
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = a + 1; b < K; ++b)
            if (x[a] == x[b]) throw std::invalid_argument("lagrange_estimate: duplicate nodes");
    for (std::size_t a = 0; a < K; ++a)
        if (z == C(x[a])) return y[a];
    C ell = C(1), sum = C(0);
    for (std::size_t a = 0; a < K; ++a) {
        R w = R(1);
        for (std::size_t b = 0; b < K; ++b)
            if (b != a) w *= x[a] - x[b];
        const C d = z - C(x[a]);
        ell *= d;
        sum += y[a] / (C(w) * d);
    }
    return ell * sum;
}

}  // namespace

cplx lagrange_estimate(std::span<const double> nodes, std::span<const cplx> values, cplx target) {
    return barycentric<double, cplx>(nodes, values, target);
}

ExtComplex lagrange_estimate(std::span<const ExtReal> nodes, std::span<const ExtComplex> values, const ExtComplex& target) {
    return barycentric<ExtReal, ExtComplex>(nodes, values, target);
}

DeltaBound required_delta(int n, int M, double beta) {
    if (!(beta > 0)) throw std::invalid_argument("required_delta: beta must be positive");
    const double mp = static_cast<double>(mprime_bound(n, M));
    const double K = 2 * mp + 1, x = std::exp(-beta);
    DeltaBound d{};
    d.log_gamma_form = std::log(std::sin(pi / 16)) + (beta + 1.488) * mp + n * (M + 2) * std::log(2.0) +
                       std::lgamma(K * x + 1) + std::lgamma(K * (1 - x)) - 2 * mp * std::log(K);
    d.log_asymptotic = double(n) * M * (49 * beta - 190);
    return d;
}

PartitionOracle exact_oracle(const IsingModel& model) {
    auto hist = xi_coefficients(model);
    return [hist = std::move(hist)](const ExtReal& beta) {
        ExtReal z = 0;
        for (const auto& [e, count] : hist) z += ExtReal(count) * exp(-beta * ExtReal(e));
        return z;
    };
}

Reconstruction reconstruct_amplitude(const PartitionOracle& oracle, const IsingInstance& instance, int nodes) {
    const long long mp = instance.mprime;
    const int K = nodes > 0 ? nodes : static_cast<int>(2 * mp + 1);
    if (K < 1) throw std::invalid_argument("reconstruct_amplitude: need at least one node");
    std::vector<ExtReal> x(K);
    std::vector<ExtComplex> p(K);
    Reconstruction out;
    out.nodes = K;
    for (int j = 1; j <= K; ++j) {
        x[j - 1] = ExtReal(j) / ExtReal(K);
        const ExtReal beta = -log(x[j - 1]);
        out.betas.push_back(static_cast<double>(beta));
        // P(e^{-beta}) = e^{-beta M'} Z(beta)
        p[j - 1] = ExtComplex(pow(x[j - 1], mp) * oracle(beta));
    }
    const ExtReal angle = -boost::math::constants::pi<ExtReal>() / 16;
    const ExtComplex z(cos(angle), sin(angle));
    const ExtComplex poly = lagrange_estimate(std::span<const ExtReal>(x), std::span<const ExtComplex>(p), z);
    // sum exp(-i pi H / 16) = z^{-M'} P(z)
    const ExtReal back = boost::math::constants::pi<ExtReal>() * ExtReal(mp) / 16;
    const ExtComplex total = poly * ExtComplex(cos(back), sin(back));
    out.amplitude = instance.prefactor * cplx(static_cast<double>(total.real()), static_cast<double>(total.imag()));
    return out;
}

nlohmann::json instance_sidecar(const IsingInstance& instance, int nodes) {
    const int K = nodes > 0 ? nodes : static_cast<int>(2 * instance.mprime + 1);
    std::vector<double> betas;
    for (int j = 1; j <= K; ++j) betas.push_back(-std::log(double(j) / K));
    return {{"model", model_to_json(instance.model)},
            {"prefactor", complex_to_json(instance.prefactor)},
            {"logical_qubits", instance.logical_qubits},
            {"steps", instance.steps},
            {"mprime", instance.mprime},
            {"mprime_bound", mprime_bound(instance.logical_qubits, instance.steps)},
            {"node_betas", betas}};
}

}  // namespace ising_lab

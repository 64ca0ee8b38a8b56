#include "doctest.h"

#include <random>

#include "ising_lab/circuit.hpp"
#include "ising_lab/io.hpp"
#include "oracles.hpp"

using namespace ising_lab;

namespace {

QuantumState random_state(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> a(std::size_t{1} << n);
    for (auto& x : a) x = {g(rng), g(rng)};
    double nn = 0;
    for (auto& x : a) nn += std::norm(x);
    for (auto& x : a) x /= std::sqrt(nn);
    return QuantumState::from_amplitudes(a);
}

const cplx I{0, 1};

}  // namespace

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

TEST_CASE("diagonal layer") {
    auto pair = Lattice::chain(2);
    std::mt19937_64 rng(1);
    auto s = random_state(2, rng);
    auto copy = s;
    apply_diagonal_layer(s, pair, {0.0, {0.7}, {0.2, 0.1}, {}});
    for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == copy[i]);

    auto b = QuantumState::basis(2, 0b10);  // spins (+1, -1)
    apply_diagonal_layer(b, pair, {pi / 2, {1.0}, {0.0, 0.0}, {}});
    CHECK(std::abs(b[0b10] - std::exp(-I * pi / 2.0)) < 1e-15);

    auto tri = Lattice::chain(3);
    auto r = random_state(3, rng);
    apply_diagonal_layer(r, tri, {1.3, {0.4, -0.9}, {0.3, 0.2, -1.0}, {0.5, 0.1, 0.2}});
    CHECK(std::abs(r.norm() - 1) < 1e-12);
    CHECK_THROWS_AS(apply_diagonal_layer(r, tri, {1.0, {0.4}, {0, 0, 0}, {}}), std::invalid_argument);
}

TEST_CASE("rotation layer") {
    std::mt19937_64 rng(2);
    auto s = random_state(2, rng);
    auto copy = s;
    apply_rotation_layer(s, {{0.0, 0.0}});
    for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == copy[i]);

    auto up = QuantumState::basis(1, 0);
    apply_rotation_layer(up, {{pi / 2}});
    CHECK(std::abs(up[1] - 1.0) < 1e-15);
    CHECK(std::abs(up[0]) < 1e-15);

    // exponential form of the matrix elements
    const cplx theta = pi / 3;
    const auto u = rotation_matrix(theta);
    const cplx k = rotation_coupling(theta), b = rotation_offset(theta);
    for (int in = 0; in < 2; ++in)
        for (int out = 0; out < 2; ++out) {
            const double s0 = in ? -1 : 1, s1 = out ? -1 : 1;
            cplx form = std::exp(k * s0 * s1 + I * (pi / 4) * (s1 - s0) + b);
            CHECK(std::abs(u[out][in] - form) < 1e-12);
        }

    auto r = random_state(3, rng);
    apply_rotation_layer(r, {{0.3, 1.1, -0.4}});
    apply_phase_layer(r, {{0.3, 1.1, -0.4}});
    apply_g_layer(r, {{0.2, 2.0, 1.0}});
    CHECK(std::abs(r.norm() - 1) < 1e-12);
}

TEST_CASE("G gate reproduces the normalized transfer matrix") {
    for (double bj : {0.3, 0.7, 1.1}) {
        const cplx theta = -I * std::log(std::tanh(bj));
        const auto g = g_matrix(theta);
        const double norm = 2 * std::cosh(bj);
        CHECK(std::abs(g[0][0] - std::exp(bj) / norm) < 1e-12);
        CHECK(std::abs(g[1][1] - std::exp(bj) / norm) < 1e-12);
        CHECK(std::abs(g[0][1] - std::exp(-bj) / norm) < 1e-12);
        CHECK(std::abs(g[1][0] - std::exp(-bj) / norm) < 1e-12);
    }
}

// ---------------------------------------------------------------------------
// amplitudes
// ---------------------------------------------------------------------------

TEST_CASE("amplitude examples") {
    CircuitProgram empty{Lattice::chain(3), {}};
    CHECK(std::abs(amplitude(empty) - 1.0) < 1e-15);
    CircuitProgram bond{Lattice::chain(2), {DiagonalLayer{pi / 3, {1.0}, {0.0, 0.0}, {}}}};
    CHECK(std::abs(amplitude(bond) - 0.5) < 1e-14);
    CHECK_THROWS_AS(amplitude(empty, {2, 2}), CapExceeded);
}

TEST_CASE("layered amplitude equals the enlarged partition sum") {
    std::mt19937_64 rng(3);
    auto spec = oracle::random_layered(Lattice::grid({2, 2}), 3, rng);
    auto inst = enlarged_instance(spec);
    CHECK(inst.model.size() == 12);
    CHECK(inst.model.lattice.is_grid());
    cplx a = amplitude(layered_program(spec));
    cplx z = inst.prefactor * boltzmann_sum(inst.model);
    CHECK(oracle::rel_err(z, a) < 1e-10);
    CHECK(oracle::rel_err(inst.prefactor * transfer_boltzmann_sum(inst.model), a) < 1e-10);
    // irregular slice lattice
    auto tri = oracle::random_layered(Lattice::irregular(3, {{0, 1}, {1, 2}, {0, 2}}), 4, rng);
    auto ti = enlarged_instance(tri);
    CHECK(oracle::rel_err(ti.prefactor * boltzmann_sum(ti.model), amplitude(layered_program(tri))) < 1e-10);
}

TEST_CASE("trace amplitude") {
    CircuitProgram id{Lattice::chain(2), {}};
    CHECK(std::abs(trace_amplitude(id) - 1.0) < 1e-15);
    CircuitProgram ph{Lattice::chain(1), {PhaseLayer{{0.8}}}};
    CHECK(std::abs(trace_amplitude(ph) - std::cos(0.8)) < 1e-15);

    std::mt19937_64 rng(4);
    auto spec = oracle::random_layered(Lattice::chain(3), 3, rng);
    auto prog = layered_program(spec);
    // diagonal elements from the full matrix built column by column
    cplx sum = 0;
    for (std::uint64_t s = 0; s < 8; ++s) {
        auto col = QuantumState::basis(3, s);
        apply_program(col, prog);
        sum += QuantumState::basis(3, s).inner(col);
    }
    CHECK(std::abs(trace_amplitude(prog) - sum / 8.0) < 1e-13);
}

// ---------------------------------------------------------------------------
// protocols
// ---------------------------------------------------------------------------

TEST_CASE("protocol 1 extremes") {
    CircuitProgram same{Lattice::chain(3), {}};
    auto e = simulate_protocol(same, Protocol::squared_overlap, 10000, 1);
    CHECK(std::abs(e.value.real() - 1) <= 3 / 100.0);
    CircuitProgram orth{Lattice::chain(3), {PhaseLayer{{pi / 2, 0, 0}}}};
    auto o = simulate_protocol(orth, Protocol::squared_overlap, 10000, 1);
    CHECK(std::abs(o.value.real()) <= 3 / 100.0);
    CHECK(o.shots.size() == 1);
    CHECK(o.shots[0].size() == 10000);
}

TEST_CASE("protocol 2 is unbiased") {
    std::mt19937_64 rng(5);
    auto prog = layered_program(oracle::random_layered(Lattice::chain(2), 2, rng));
    const cplx a = amplitude(prog);
    double sx = 0, sy = 0, sxx = 0, syy = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        auto e = simulate_protocol(prog, Protocol::overlap, 500, seed);
        sx += e.value.real();
        sy += e.value.imag();
        sxx += e.value.real() * e.value.real();
        syy += e.value.imag() * e.value.imag();
    }
    const double mx = sx / seeds, my = sy / seeds;
    const double sex = std::sqrt((sxx / seeds - mx * mx) / (seeds - 1));
    const double sey = std::sqrt((syy / seeds - my * my) / (seeds - 1));
    CHECK(std::abs(mx - a.real()) < 5 * sex);
    CHECK(std::abs(my - a.imag()) < 5 * sey);
}

TEST_CASE("protocol sampling is independent of thread count") {
    auto a = sample_register(4, 0.3, 20000, 9, 0, 1);
    auto b = sample_register(4, 0.3, 20000, 9, 0, 3);
    CHECK(a == b);
    CHECK_THROWS_AS(sample_register(2, 1.5, 10, 1, 0), std::invalid_argument);
}

TEST_CASE("full-register protocols match the exact expectations") {
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 3; ++n) {
        auto prog = layered_program(oracle::random_layered(Lattice::chain(n), 3, rng));
        prog.layers.push_back(GLayer{std::vector<cplx>(n, 0.7)});
        const cplx a = amplitude(prog);
        CHECK(std::abs(full_register_protocol1(prog) - std::norm(a)) < 1e-12);
        CHECK(std::abs(full_register_protocol2(prog) - a) < 1e-12);
    }
    CircuitProgram big{Lattice::chain(5), {}};
    CHECK_THROWS_AS(full_register_protocol1(big), CapExceeded);
}

TEST_CASE("program json round trip") {
    std::mt19937_64 rng(7);
    auto prog = layered_program(oracle::random_layered(Lattice::grid({2, 2}), 2, rng));
    prog.layers.push_back(GLayer{{0.1, cplx(0.2, 0.3), 0.0, 1.0}});
    auto back = program_from_json(program_to_json(prog));
    CHECK(back.layers.size() == prog.layers.size());
    CHECK(std::abs(amplitude(back) - amplitude(prog)) < 1e-15);
    auto bad = program_to_json(prog);
    bad["layers"][0]["kind"] = "nope";
    CHECK_THROWS_AS(program_from_json(bad), std::invalid_argument);
}

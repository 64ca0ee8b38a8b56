#include "doctest.h"

#include <random>

#include "ising_lab/bqp.hpp"
#include "oracles.hpp"

using namespace ising_lab;

namespace {

std::vector<TOperator> random_ops(int steps, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<TOperator> ops;
    for (int s = 0; s < steps; ++s) ops.push_back({coin(rng), coin(rng), s > 0});
    return ops;
}

}  // namespace

// ---------------------------------------------------------------------------
// gate set
// ---------------------------------------------------------------------------

TEST_CASE("global gates are unitary") {
    for (auto g : {GlobalGate::controlled_phase(), GlobalGate::hadamard(), GlobalGate::shift(1),
                   GlobalGate::rotation(PauliAxis::z, pi / 8), GlobalGate::rotation(PauliAxis::y, 0.3)}) {
        const std::vector<GlobalGate> seq{g};
        const auto u = global_unitary(seq, 4);
        const std::size_t d = 16;
        double worst = 0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) {
                cplx s = 0;
                for (std::size_t k = 0; k < d; ++k) s += std::conj(u[k + d * a]) * u[k + d * b];
                worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
            }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("shift powers") {
    for (int n : {1, 2}) {
        const int N = 2 * n;
        const std::size_t d = std::size_t{1} << N;
        // reversal of the qubit order
        std::vector<cplx> reverse(d * d, 0.0);
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t r = 0;
            for (int q = 0; q < N; ++q)
                if ((c >> q) & 1u) r |= std::size_t{1} << (N - 1 - q);
            reverse[r + d * c] = 1;
        }
        const std::vector<GlobalGate> refl{GlobalGate::shift(N + 1)};
        CHECK(distance_up_to_phase(global_unitary(refl, N), reverse) < 1e-10);
        std::vector<cplx> eye(d * d, 0.0);
        for (std::size_t c = 0; c < d; ++c) eye[c + d * c] = 1;
        const std::vector<GlobalGate> full{GlobalGate::shift(2 * N + 2)};
        CHECK(distance_up_to_phase(global_unitary(full, N), eye) < 1e-10);
    }
}

TEST_CASE("logical gates compile exactly on the mirrored register") {
    for (int n : {2, 3}) {
        for (int k = 1; k <= n; ++k)
            for (auto kind : {LogicalGate::Kind::z, LogicalGate::Kind::x, LogicalGate::Kind::hadamard, LogicalGate::Kind::v}) {
                if (kind == LogicalGate::Kind::v && k == n) continue;
                const LogicalGate g{kind, k, 0.37};
                const auto seq = compile_logical(g, n);
                CHECK(distance_up_to_phase(global_unitary(seq, 2 * n), logical_target(g, n)) < 1e-10);
            }
    }
    // zero angle composes to the identity
    const auto seq = compile_logical({LogicalGate::Kind::x, 1, 0.0}, 2);
    std::vector<cplx> eye(256, 0.0);
    for (std::size_t c = 0; c < 16; ++c) eye[c + 16 * c] = 1;
    CHECK(distance_up_to_phase(global_unitary(seq, 4), eye) < 1e-10);
    CHECK_THROWS_AS(compile_logical({LogicalGate::Kind::z, 3, 0.1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(compile_logical({LogicalGate::Kind::v, 2, 0.1}, 2), std::invalid_argument);
}

TEST_CASE("z rotation by pi/4 on two logical qubits") {
    const LogicalGate g{LogicalGate::Kind::z, 1, pi / 4};
    const auto u = global_unitary(compile_logical(g, 2), 4);
    // direct exp(i pi/8 (Z_0 + Z_3))
    std::vector<cplx> want(256, 0.0);
    for (std::size_t c = 0; c < 16; ++c) {
        const double z0 = (c & 1u) ? -1 : 1, z3 = (c & 8u) ? -1 : 1;
        want[c + 16 * c] = std::exp(cplx(0, pi / 8 * (z0 + z3)));
    }
    CHECK(distance_up_to_phase(u, want) < 1e-10);
}

// ---------------------------------------------------------------------------
// T operators and instances
// ---------------------------------------------------------------------------

TEST_CASE("lowering to T operators keeps the amplitude") {
    const std::vector<GlobalGate> seq{GlobalGate::rotation(PauliAxis::z, pi / 8), GlobalGate::controlled_phase(),
                                      GlobalGate::hadamard(), GlobalGate::rotation(PauliAxis::z, 3 * pi / 8),
                                      GlobalGate::hadamard(), GlobalGate::controlled_phase()};
    const auto ops = lower_to_t_operators(seq);
    const int n = 2;
    std::vector<cplx> plus(16, 0.25);
    const auto u = global_unitary(seq, 4);
    cplx direct = 0;
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c) direct += plus[r] * u[r + 16 * c] * plus[c];
    CHECK(std::abs(std::abs(t_sequence_amplitude(ops, n)) - std::abs(direct)) < 1e-12);
    CHECK_THROWS_AS(lower_to_t_operators(std::vector<GlobalGate>{GlobalGate::rotation(PauliAxis::x, 0.1)}), std::invalid_argument);
}

TEST_CASE("single step is a one-dimensional partition function") {
    for (int n : {1, 2, 3})
        for (bool cp : {false, true})
            for (bool ph : {false, true}) {
                const std::vector<TOperator> ops{{cp, ph, false}};
                const auto inst = circuit_to_ising(ops, n);
                const cplx z = partition_function(inst.model, cplx(0, pi / 16));
                CHECK(std::abs(inst.prefactor * z - t_sequence_amplitude(ops, n)) < 1e-12);
                CHECK(std::abs(std::abs(inst.prefactor) - std::pow(2.0, -2 * n)) < 1e-15);
            }
}

TEST_CASE("amplitude equals the imaginary-temperature sum") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 2, M = 1 + (trial / 2) % (n == 1 ? 8 : 4);
        const auto ops = random_ops(M, rng);
        const auto inst = circuit_to_ising(ops, n);
        const cplx z = oracle::brute_z(inst.model, cplx(0, pi / 16));
        CHECK(std::abs(inst.prefactor * z - t_sequence_amplitude(ops, n)) < 1e-10);
        for (double j : inst.model.couplings) CHECK(j == 4.0);
        for (double h : inst.model.fields) {
            CHECK(h >= 0);
            CHECK(h <= 17);
            CHECK(h == std::round(h));
        }
        CHECK(inst.mprime <= mprime_bound(n, M));
        // the bound on |H| is attained by the all-up configuration
        CHECK(-energy(inst.model, SpinConfiguration(inst.model.size(), 0)) == double(inst.mprime));
    }
    CHECK_THROWS_AS(circuit_to_ising(std::vector<TOperator>{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(circuit_to_ising(std::vector<TOperator>{{true, false, true}}, 1), std::invalid_argument);
}

TEST_CASE("mprime bound") {
    CHECK(mprime_bound(1, 1) == 14);
    for (int n = 1; n < 5; ++n)
        for (int m = 1; m < 5; ++m) {
            CHECK(mprime_bound(n + 1, m) > mprime_bound(n, m));
            CHECK(mprime_bound(n, m + 1) > mprime_bound(n, m));
        }
    // every instance on small registers stays below the bound
    for (int n = 1; n <= 2; ++n)
        for (int M = 1; M <= 3; ++M) {
            const int combos = 1 << (2 * M);
            for (int mask = 0; mask < combos; ++mask) {
                std::vector<TOperator> ops;
                for (int s = 0; s < M; ++s) ops.push_back({bool(mask >> (2 * s) & 1), bool(mask >> (2 * s + 1) & 1), s > 0});
                CHECK(circuit_to_ising(ops, n).mprime <= mprime_bound(n, M));
            }
        }
}

// ---------------------------------------------------------------------------
// interpolation
// ---------------------------------------------------------------------------

TEST_CASE("lagrange interpolation in double precision") {
    const cplx target = std::exp(cplx(0, pi / 16));
    std::vector<double> x;
    std::vector<cplx> c{0.3, -1.0, 0.25, 2.0, -0.5, 1.5}, y;
    auto poly = [&](cplx z) {
        cplx s = 0;
        for (std::size_t k = c.size(); k-- > 0;) s = s * z + c[k];
        return s;
    };
    for (int j = 1; j <= 6; ++j) {
        x.push_back(j / 6.0);
        y.push_back(poly(j / 6.0));
    }
    CHECK(std::abs(lagrange_estimate(x, y, target) - poly(target)) < 1e-10);
    std::vector<cplx> flat(6, 2.5);
    CHECK(std::abs(lagrange_estimate(x, flat, target) - 2.5) < 1e-12);
    x[1] = x[0];
    CHECK_THROWS_AS(lagrange_estimate(x, y, target), std::invalid_argument);
}

TEST_CASE("equispaced interpolation conditioning grows with the degree") {
    // not asserted small: the error at the unit-circle target grows roughly
    // geometrically with the number of nodes in double precision
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const cplx target = std::exp(cplx(0, -pi / 16));
    double err10 = 0, err30 = 0;
    for (int deg : {10, 30}) {
        std::vector<double> c(deg + 1);
        for (auto& v : c) v = u(rng);
        std::vector<double> x;
        std::vector<cplx> y;
        for (int j = 1; j <= deg + 1; ++j) {
            const double xj = double(j) / (deg + 1);
            double s = 0;
            for (std::size_t k = c.size(); k-- > 0;) s = s * xj + c[k];
            x.push_back(xj);
            y.push_back(s);
        }
        cplx exact = 0;
        for (std::size_t k = c.size(); k-- > 0;) exact = exact * target + c[k];
        (deg == 10 ? err10 : err30) = std::abs(lagrange_estimate(x, y, target) - exact);
    }
    MESSAGE("degree 10 error " << err10 << ", degree 30 error " << err30);
    CHECK(err30 > err10);
}

TEST_CASE("degree-20 interpolation") {
    const cplx target = std::exp(cplx(0, -pi / 16));
    auto run = [&](int deg) {
        std::vector<double> c(deg + 1);
        for (int k = 0; k <= deg; ++k) c[k] = std::cos(1.0 + k);
        std::vector<double> x;
        std::vector<cplx> y;
        std::vector<ExtReal> xe;
        std::vector<ExtComplex> ye;
        for (int j = 1; j <= deg + 1; ++j) {
            const ExtReal xj = ExtReal(j) / ExtReal(deg + 1);
            ExtReal s = 0;
            for (std::size_t k = c.size(); k-- > 0;) s = s * xj + ExtReal(c[k]);
            xe.push_back(xj);
            ye.push_back(ExtComplex(s));
            x.push_back(static_cast<double>(xj));
            y.push_back(static_cast<double>(s));
        }
        cplx exact = 0;
        for (std::size_t k = c.size(); k-- > 0;) exact = exact * target + c[k];
        const ExtComplex te(target.real(), target.imag());
        const ExtComplex ext = lagrange_estimate(xe, ye, te);
        const cplx ext_d(static_cast<double>(ext.real()), static_cast<double>(ext.imag()));
        return std::pair{std::abs(lagrange_estimate(x, y, target) - exact), std::abs(ext_d - exact)};
    };
    // double precision holds the 1e-10 level through degree 18 on this family
    for (int deg = 2; deg <= 18; deg += 4) CHECK(run(deg).first < 1e-10);
    const auto [dbl, ext] = run(20);
    MESSAGE("degree-20 error: double " << dbl << ", extended " << ext);
    CHECK(ext < 1e-13);
}

TEST_CASE("reconstruction from exact partition values") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 3; ++trial) {
        const auto ops = random_ops(2 + trial % 2, rng);
        const auto inst = circuit_to_ising(ops, 2);
        const auto rec = reconstruct_amplitude(exact_oracle(inst.model), inst);
        CHECK(rec.nodes == 2 * inst.mprime + 1);
        CHECK(std::abs(rec.amplitude - t_sequence_amplitude(ops, 2)) < 1e-6);
    }
    // the empty circuit on |+> has amplitude one
    const std::vector<TOperator> none{{false, false, false}};
    const auto inst = circuit_to_ising(none, 1);
    CHECK(std::abs(reconstruct_amplitude(exact_oracle(inst.model), inst).amplitude - 1.0) < 1e-12);
}

TEST_CASE("required delta forms") {
    for (int n : {1, 2, 4})
        for (int M : {1, 3, 6})
            for (double b : {0.5, 2.0}) {
                auto d = required_delta(n, M, b);
                CHECK(std::isfinite(d.log_gamma_form));
                CHECK(std::isfinite(d.log_asymptotic));
            }
    const auto d = required_delta(2, 3, 2.0);
    const double mp = double(mprime_bound(2, 3)), K = 2 * mp + 1, x = std::exp(-2.0);
    const double direct = std::log(std::sin(pi / 16)) + (2.0 + 1.488) * mp + 2 * 5 * std::log(2.0) +
                          std::lgamma(K * x + 1) + std::lgamma(K * (1 - x)) - 2 * mp * std::log(K);
    CHECK(std::abs(d.log_gamma_form - direct) < 1e-9 * std::abs(direct));
    CHECK_THROWS_AS(required_delta(1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("ratio of the two delta forms settles") {
    // the ratio of logs converges as nM grows, to a value that is not one
    std::vector<double> ratios;
    for (int m : {10, 100, 1000}) {
        const auto d = required_delta(1, m, 2.0);
        ratios.push_back(d.log_gamma_form / d.log_asymptotic);
    }
    MESSAGE("log ratios " << ratios[0] << " " << ratios[1] << " " << ratios[2]);
    CHECK(std::abs(ratios[2] - ratios[1]) < std::abs(ratios[1] - ratios[0]));
}

#include "doctest.h"

#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ising_lab/io.hpp"
#include "ising_lab/ising_model.hpp"
#include "oracles.hpp"

using namespace ising_lab;

// ---------------------------------------------------------------------------
// lattice and energy
// ---------------------------------------------------------------------------

TEST_CASE("grid lattice edges") {
    auto open = Lattice::grid({3, 3});
    CHECK(open.size() == 9);
    CHECK(open.edge_count() == 12);
    auto torus = Lattice::grid({3, 4}, {true, true});
    CHECK(torus.edge_count() == 24);
    // extent-2 periodic axes do not double the bond
    CHECK(Lattice::grid({2, 3}, {true, false}).edge_count() == Lattice::grid({2, 3}).edge_count());
    std::vector<int> c{1, 2};
    CHECK(open.coords(open.site(c)) == c);
}

TEST_CASE("irregular lattice validation") {
    CHECK_THROWS_AS(Lattice::irregular(2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Lattice::irregular(2, {{0, 1}, {1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Lattice::irregular(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("model length validation") {
    CHECK_THROWS_AS(IsingModel(Lattice::chain(3), {1.0}, {0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(IsingModel(Lattice::chain(3), {1.0, 1.0}, {0, 0}), std::invalid_argument);
}

TEST_CASE("spin configuration round trip") {
    std::vector<int> s{1, -1, -1, 1, -1};
    auto c = SpinConfiguration::from_spins(s);
    CHECK(c.bits() == 0b10110);
    CHECK(c.spins() == s);
    CHECK_THROWS(SpinConfiguration(3, 0b1000));
}

TEST_CASE("energy examples") {
    IsingModel one(Lattice::chain(1), {}, {1.0});
    CHECK(energy(one, SpinConfiguration(1, 0)) == -1.0);
    auto two = IsingModel::uniform(Lattice::chain(2), 1.0, 0.0);
    CHECK(energy(two, SpinConfiguration(2, 0)) == -1.0);
    auto grid = IsingModel::uniform(Lattice::grid({3, 3}), 1.0, 1.0);
    CHECK(energy(grid, SpinConfiguration(9, 0)) == -21.0);
    CHECK_THROWS_AS(energy(grid, SpinConfiguration(8, 0)), std::invalid_argument);
}

TEST_CASE("energy is flip invariant without fields") {
    std::mt19937_64 rng(3);
    auto m = oracle::random_model(Lattice::grid({3, 3}), rng);
    for (auto& h : m.fields) h = 0;
    for (std::uint64_t b = 0; b < 512; b += 37)
        CHECK(energy(m, SpinConfiguration(9, b)) == doctest::Approx(energy(m, SpinConfiguration(9, b ^ 511))));
}

// ---------------------------------------------------------------------------
// partition functions
// ---------------------------------------------------------------------------

TEST_CASE("partition function examples") {
    std::mt19937_64 rng(5);
    auto m = oracle::random_model(Lattice::grid({3, 2}), rng);
    CHECK(std::abs(partition_function(m, 0.0) - cplx(64, 0)) < 1e-12);
    IsingModel one(Lattice::chain(1), {}, {1.0});
    CHECK(std::abs(partition_function(one, 1.0) - 2 * std::cosh(1.0)) < 1e-14);
    auto sq = IsingModel::uniform(Lattice::grid({2, 2}), 1.0, 0.0);
    // 16 configurations: 2 with E=-4, 2 with E=+4, 12 with E=0
    double exact = 2 * std::exp(2.0) + 2 * std::exp(-2.0) + 12;
    CHECK(std::abs(partition_function(sq, 0.5) - exact) < 1e-12);
    IsingModel empty(Lattice::irregular(0, {}), {}, {});
    CHECK(partition_function(empty, 0.7) == cplx(1, 0));
}

TEST_CASE("enumeration matches naive sum") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 6; ++trial) {
        auto m = oracle::random_model(Lattice::grid({4, 4}), rng);
        cplx beta(0.3 + 0.2 * trial, 0.5 - 0.3 * trial);
        CHECK(oracle::rel_err(partition_function(m, beta), oracle::brute_z(m, beta)) < 1e-12);
    }
}

TEST_CASE("enumeration spans several chunks") {
    std::mt19937_64 rng(12);
    auto m17 = oracle::random_model(Lattice::grid({17}), rng);
    CHECK(oracle::rel_err(partition_function(m17, cplx(0.4, 0.1)), oracle::brute_z(m17, cplx(0.4, 0.1))) < 1e-11);
}

TEST_CASE("thread count does not change results") {
    std::mt19937_64 rng(13);
    auto m18 = oracle::random_model(Lattice::grid({6, 3}), rng);
    EnumerationOptions one{26, 1}, four{26, 4};
    CHECK(partition_function(m18, 0.7, Method::enumerate, one) == partition_function(m18, 0.7, Method::enumerate, four));
}

TEST_CASE("enumeration cap") {
    auto m = IsingModel::uniform(Lattice::grid({3, 3}), 1.0, 0.0);
    CHECK_THROWS_AS(partition_function(m, 1.0, Method::enumerate, {8, 1}), CapExceeded);
    CHECK_THROWS_AS(partition_function(IsingModel(Lattice::irregular(2, {{0, 1}}), {1.0}, {0, 0}), 1.0, Method::transfer),
                    std::invalid_argument);
}

TEST_CASE("transfer matrix agrees with enumeration") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 4; ++n)
        for (int m = 1; m <= 6; ++m)
            for (int per = 0; per < 4; ++per) {
                auto l = Lattice::grid({n, m}, {bool(per & 1), bool(per & 2)});
                auto model = oracle::random_model(l, rng);
                for (cplx beta : {cplx(0.8, 0), cplx(0.3, 1.1)}) {
                    cplx a = partition_function(model, beta, Method::enumerate);
                    cplx b = partition_function(model, beta, Method::transfer);
                    CHECK_MESSAGE(oracle::rel_err(b, a) < 1e-12, n, "x", m, " periodic ", per);
                }
            }
    auto cube = oracle::random_model(Lattice::grid({2, 3, 3}, {false, true, true}), rng);
    CHECK(oracle::rel_err(partition_function(cube, cplx(0.5, 0.2), Method::transfer),
                          oracle::brute_z(cube, cplx(0.5, 0.2))) < 1e-12);
    auto chain = oracle::random_model(Lattice::chain(9, true), rng);
    CHECK(oracle::rel_err(partition_function(chain, 1.3, Method::transfer), oracle::brute_z(chain, 1.3)) < 1e-12);
}

TEST_CASE("transfer matrix in multiprecision") {
    using boost::multiprecision::cpp_bin_float_50;
    auto m = IsingModel::uniform(Lattice::grid({3, 3}), 1.0, 0.5);
    auto mp = m.cast<cpp_bin_float_50>().scaled(cpp_bin_float_50(0.4));
    double z = static_cast<double>(transfer_boltzmann_sum(mp));
    CHECK(oracle::rel_err(z, partition_function(m, 0.4)) < 1e-13);
}

TEST_CASE("xi coefficients") {
    IsingModel one(Lattice::chain(1), {}, {1.0});
    CHECK(xi_coefficients(one) == std::map<long long, std::uint64_t>{{-1, 1}, {1, 1}});
    auto two = IsingModel::uniform(Lattice::chain(2), 1.0, 0.0);
    CHECK(xi_coefficients(two) == std::map<long long, std::uint64_t>{{-1, 2}, {1, 2}});
    CHECK_THROWS_AS(xi_coefficients(IsingModel(Lattice::chain(1), {}, {0.5})), std::invalid_argument);

    std::mt19937_64 rng(19);
    auto pm = IsingModel::uniform(Lattice::grid({4, 4}), 0.0, 0.0);
    for (auto& j : pm.couplings) j = (rng() & 1) ? 1.0 : -1.0;
    std::uint64_t total = 0;
    for (auto [k, c] : xi_coefficients(pm)) total += c;
    CHECK(total == 65536);

    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_model(Lattice::grid({3, 3}), rng, true);
        auto xi = xi_coefficients(m);
        for (int b = 0; b < 5; ++b) {
            cplx beta(0.1 + 0.15 * b, 0.4 * b - 0.8);
            cplx z = 0;
            for (auto [k, c] : xi) z += double(c) * std::exp(-double(k) * beta);
            CHECK(oracle::rel_err(z, oracle::brute_z(m, beta)) < 1e-10);
        }
    }
}

TEST_CASE("thermal averages") {
    IsingModel one(Lattice::chain(1), {}, {1.0});
    auto t = thermal_averages(one, 0.7);
    CHECK(t.log_z == doctest::Approx(std::log(2 * std::cosh(0.7))));
    CHECK(t.energy == doctest::Approx(-std::tanh(0.7)));
    CHECK(t.specific_heat == doctest::Approx(0.49 * (1 - std::tanh(0.7) * std::tanh(0.7))));
}

// ---------------------------------------------------------------------------
// pinning
// ---------------------------------------------------------------------------

TEST_CASE("corner magnetization examples") {
    auto sym = IsingModel::uniform(Lattice::grid({3, 3}), 1.0, 0.0);
    CHECK(std::abs(corner_magnetization(sym, 0.8, {}, 0)) < 1e-14);
    IsingModel one(Lattice::chain(1), {}, {1.0});
    CHECK(corner_magnetization(one, 1.0, {}, 0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-14));
    auto pair = IsingModel::uniform(Lattice::chain(2), 1.0, 0.0);
    CHECK(corner_magnetization(pair, 0.5, {{1, 1}}, 0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(corner_magnetization(pair, 0.5, {{0, 1}}, 0), std::invalid_argument);
}

TEST_CASE("corner magnetization matches conditional enumeration") {
    std::mt19937_64 rng(23);
    auto m = oracle::random_model(Lattice::grid({3, 3}), rng);
    PinnedSet pins{{0, 1}, {4, -1}};
    double num = 0, den = 0;
    for (std::uint64_t b = 0; b < 512; ++b) {
        if (spin_of(b, 0) != 1 || spin_of(b, 4) != -1) continue;
        double w = std::exp(-0.6 * energy(m, SpinConfiguration(9, b)));
        num += w * spin_of(b, 7);
        den += w;
    }
    CHECK(corner_magnetization(m, 0.6, pins, 7) == doctest::Approx(num / den).epsilon(1e-13));

    // odd under h -> -h for field-only models
    IsingModel fields(Lattice::grid({2, 2}), {0, 0, 0, 0}, {0.3, -0.2, 0.9, 0.1});
    auto flipped = fields;
    for (auto& h : flipped.fields) h = -h;
    for (int s = 0; s < 4; ++s) {
        double a = corner_magnetization(fields, 1.2, {}, s);
        CHECK(std::abs(a) <= 1.0);
        CHECK(a == doctest::Approx(-corner_magnetization(flipped, 1.2, {}, s)));
    }
}

TEST_CASE("reduce_pinned keeps the energy") {
    std::mt19937_64 rng(29);
    auto m = oracle::random_model(Lattice::grid({3, 2}), rng);
    PinnedSet pins{{2, -1}, {3, 1}};
    auto r = reduce_pinned(m, pins);
    for (std::uint64_t b = 0; b < 16; ++b) {
        SpinConfiguration full(6);
        full.set(2, -1);
        full.set(3, 1);
        for (int i = 0; i < 4; ++i) full.set(r.original_site[i], spin_of(b, i));
        CHECK(energy(m, full) == doctest::Approx(energy(r.model, SpinConfiguration(4, b)) + r.constant_energy));
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

TEST_CASE("model json round trip") {
    std::mt19937_64 rng(31);
    auto m = oracle::random_model(Lattice::grid({3, 2}, {true, false}), rng);
    auto back = model_from_json(model_to_json(m));
    CHECK(back.couplings == m.couplings);
    CHECK(back.lattice.edges() == m.lattice.edges());
    auto ir = IsingModel(Lattice::irregular(3, {{0, 2}, {1, 2}}), {1, -1}, {0, 0, 2});
    CHECK(model_from_json(model_to_json(ir)).lattice.edges() == ir.lattice.edges());
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"lattice":{"dims":[2]},"couplings":[1,2]})")),
                    std::invalid_argument);
}

#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "ising_lab/fpras.hpp"
#include "oracles.hpp"

using namespace ising_lab;

namespace {

// upper tail of the chi-square statistic of observed counts against expected probabilities
double chi_square_p(const std::vector<int>& counts, const std::vector<double>& prob) {
    double total = 0;
    for (int c : counts) total += c;
    double stat = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = total * prob[i];
        stat += (counts[i] - e) * (counts[i] - e) / e;
    }
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

std::vector<double> boltzmann(const IsingModel& m, double beta) {
    const int n = m.size();
    const double z = oracle::brute_z(m, beta).real();
    std::vector<double> p(std::size_t{1} << n);
    for (std::uint64_t b = 0; b < p.size(); ++b)
        p[b] = std::exp(-beta * energy(m, SpinConfiguration(n, b))) / z;
    return p;
}

std::vector<int> histogram(SequentialSampler& s, int draws, std::uint64_t seed) {
    std::vector<int> counts(std::size_t{1} << s.model().size());
    for (int i = 0; i < draws; ++i) ++counts[s.draw(seed, i).bits()];
    return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// schedule and counts
// ---------------------------------------------------------------------------

TEST_CASE("field schedule") {
    auto s = schedule(1, 1, 9, 1);
    CHECK(s.L == 9);
    CHECK(std::abs(s.dh - 1.0 / 9) < 1e-15);
    CHECK(s.fields.size() == 10);
    CHECK(s.fields.front() == 0);
    CHECK(s.fields.back() == 1);
    for (int k = 1; k <= s.L; ++k) CHECK(std::abs(s.fields[k] - s.fields[k - 1] - s.dh) < 1e-14);

    CHECK(schedule(1, 1, 16, 2).L * 2 == schedule(1, 1, 16, 1).L);
    // rounding up keeps the realized eta below the requested one
    auto r = schedule(0.5, 0.5, 9, 1);
    CHECK(r.L == 3);
    CHECK(r.eta <= 1);
    CHECK(std::abs(r.eta - 0.5 * 9 * r.dh) < 1e-15);

    CHECK_THROWS_AS(schedule(0, 1, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS(schedule(-1, 1, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS(schedule(1, 1, 9, 0), std::invalid_argument);
}

TEST_CASE("sample count is the smallest n reaching 3/4") {
    const int L = 9;
    const double eta = 1, delta = 0.05;
    const auto n = sample_count(L, eta, delta);
    // the confidence by direct substitution
    auto conf = [&](double m) {
        const double zeta = std::log(1 + delta) / (L * std::exp(eta));
        return std::pow(1 - 2 * std::exp(-2 * m * zeta * zeta / std::pow(std::sinh(eta), 2)), L);
    };
    CHECK(conf(double(n)) >= 0.75);
    CHECK(conf(double(n - 1)) < 0.75);
    CHECK(stage_confidence(n, L, eta, delta) >= 0.75);
    // the same n from the closed form
    const double closed = -std::pow(std::sinh(eta), 2) * std::exp(2 * eta) * L * L /
                          (2 * std::pow(std::log(1 + delta), 2)) * std::log(0.5 * (1 - std::pow(0.75, 1.0 / L)));
    CHECK(std::abs(double(n) - std::ceil(closed)) <= 1);

    // n ~ L^2 log L; the log term is ln(2L / ln(4/3)) up to O(1/L)
    std::vector<double> ratio;
    for (int l : {4, 8, 16, 32, 64})
        ratio.push_back(double(sample_count(l, 0.5, 0.05)) / (l * double(l) * std::log(2 * l / std::log(4.0 / 3))));
    for (double x : ratio) CHECK(std::abs(x / ratio.back() - 1) < 0.03);
    const double slope = std::log(double(sample_count(64, 0.5, 0.05)) / double(sample_count(32, 0.5, 0.05))) / std::log(2.0);
    CHECK(slope > 2.0);
    CHECK(slope < 2.2);

    std::uint64_t prev = sample_count(9, 1, 0.01);
    for (double d : {0.05, 0.2, 0.5, 0.9}) {
        const auto c = sample_count(9, 1, d);
        CHECK(c < prev);
        prev = c;
    }
    CHECK_THROWS_AS(sample_count(9, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_count(0, 1, 0.1), std::invalid_argument);
}

TEST_CASE("finesse bound") {
    const double f = finesse_bound(9, 1, 0.05);
    CHECK(std::abs(f - std::log(1 + 2 * std::exp(-2.0) / 9 * std::log(1.05)) / 9) < 1e-16);
    CHECK(f > 0);
    const double n = 1e4;
    const double lead = 2 * std::exp(-2.0) * std::log(1.05) / (n * n);
    CHECK(std::abs(finesse_bound(10000, 1, 0.05) / lead - 1) < 1e-4);
    double prev = 0;
    for (double e : {0.001, 0.01, 0.1, 0.5}) {
        const double x = finesse_bound(9, 1, e);
        CHECK(x > prev);
        prev = x;
    }
    CHECK_THROWS_AS(finesse_bound(9, 1, 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// sampler
// ---------------------------------------------------------------------------

TEST_CASE("snake order") {
    CHECK(snake_order(Lattice::grid({3, 3})) == std::vector<int>{0, 1, 2, 5, 4, 3, 6, 7, 8});
    CHECK(snake_order(Lattice::chain(4)) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("infinite temperature gives uniform samples") {
    auto m = IsingModel::uniform(Lattice::chain(3), 1.0, 0.4);
    SequentialSampler s(exact_magnetization_oracle(), m, 0.0);
    const auto counts = histogram(s, 10000, 11);
    CHECK(chi_square_p(counts, std::vector<double>(8, 1.0 / 8)) > 0.01);
}

TEST_CASE("strong field aligns every spin") {
    auto m = IsingModel::uniform(Lattice::grid({2, 2}), 0.0, 3.0);
    SequentialSampler s(exact_magnetization_oracle(), m, 3.0);
    int aligned = 0;
    for (int i = 0; i < 1000; ++i) aligned += s.draw(5, i).bits() == 0;
    CHECK(aligned >= 999);
}

TEST_CASE("sequential sampler follows the Boltzmann distribution") {
    for (double j : {1.0, -1.0}) {
        auto m = IsingModel::uniform(Lattice::grid({2, 2}), j, 0.3);
        const double beta = 0.5;
        const auto p = boltzmann(m, beta);
        SequentialSampler s(exact_magnetization_oracle(), m, beta);
        for (std::uint64_t b = 0; b < 16; ++b) CHECK(std::abs(s.probability(SpinConfiguration(4, b)) - p[b]) < 1e-12);
        CHECK(chi_square_p(histogram(s, 10000, 3), p) > 0.01);
        // any order is exact
        SequentialSampler r(exact_magnetization_oracle(), m, beta, {3, 0, 2, 1});
        for (std::uint64_t b = 0; b < 16; ++b) CHECK(std::abs(r.probability(SpinConfiguration(4, b)) - p[b]) < 1e-12);
    }
    auto m = IsingModel::uniform(Lattice::chain(2), 1.0, 0.0);
    CHECK_THROWS_AS(SequentialSampler(exact_magnetization_oracle(), m, 1.0, {0, 0}), std::invalid_argument);
    MagnetizationOracle bad{[](const IsingModel&, double, const PinnedSet&, int) { return 1.5; }, 0.0};
    CHECK_THROWS_AS(sequential_sample(bad, m, 1.0, 1), std::invalid_argument);
}

TEST_CASE("noisy oracle respects its finesse") {
    auto m = IsingModel::uniform(Lattice::grid({2, 2}), 1.0, 0.2);
    const double f = 0.05;
    SequentialSampler exact(exact_magnetization_oracle(), m, 0.7), noisy(noisy_oracle(exact_magnetization_oracle(), f, 9), m, 0.7);
    double worst = 0;
    for (int d = 0; d < 4; ++d)
        for (std::uint64_t pre = 0; pre < (std::uint64_t{1} << d); ++pre) {
            const double a = exact.conditional(d, pre), b = noisy.conditional(d, pre);
            for (int s : {1, -1}) worst = std::max(worst, std::abs((1 + s * b) - (1 + s * a)) / (1 + s * a));
        }
    CHECK(worst <= f + 1e-12);
    CHECK(worst > f / 4);
}

// ---------------------------------------------------------------------------
// estimator
// ---------------------------------------------------------------------------

TEST_CASE("stage ratios are bounded and unbiased") {
    auto m = IsingModel::uniform(Lattice::grid({2, 2}), 1.0, 0.0);
    const double beta = 0.5, h = 0.5;
    EstimatorOptions opts;
    opts.eta = 0.25;
    const int runs = 40;
    std::vector<double> sum, sumsq;
    FieldSchedule sched;
    for (int r = 0; r < runs; ++r) {
        auto run = estimate_partition(exact_magnetization_oracle(), m, beta, h, 0.5, 100 + r, opts);
        sched = run.schedule;
        sum.resize(run.rho.size());
        sumsq.resize(run.rho.size());
        for (std::size_t k = 0; k < run.rho.size(); ++k) {
            CHECK(run.rho[k] >= std::exp(-run.schedule.eta));
            CHECK(run.rho[k] <= std::exp(run.schedule.eta));
            sum[k] += run.rho[k];
            sumsq[k] += run.rho[k] * run.rho[k];
        }
    }
    REQUIRE(sched.L == 4);
    for (int k = 1; k <= sched.L; ++k) {
        const double truth = oracle::brute_z(with_uniform_field(m, sched.fields[k]), beta).real() /
                             oracle::brute_z(with_uniform_field(m, sched.fields[k - 1]), beta).real();
        const double mean = sum[k - 1] / runs;
        const double se = std::sqrt((sumsq[k - 1] / runs - mean * mean) / (runs - 1));
        CHECK(std::abs(mean - truth) < 5 * se + 1e-12);
    }
}

TEST_CASE("estimator reaches eps on small instances") {
    struct Case {
        IsingModel model;
        double beta, h;
    };
    std::vector<Case> cases = {
        {IsingModel::uniform(Lattice::grid({3, 3}), 0.0, 0.0), 0.5, 0.5},
        {IsingModel::uniform(Lattice::grid({3, 3}), 1.0, 0.0), 0.5, 0.5},
        {IsingModel::uniform(Lattice::grid({2, 2}), -1.0, 0.0), 0.5, 0.5},
    };
    const double eps = 0.1;
    for (const auto& c : cases) {
        const double z = oracle::brute_z(with_uniform_field(c.model, c.h), c.beta).real();
        int ok = 0;
        const int runs = 10;
        for (int r = 0; r < runs; ++r) {
            auto run = estimate_partition(exact_magnetization_oracle(), c.model, c.beta, c.h, eps, r);
            ok += std::abs(run.z_hat - z) <= eps * z;
        }
        CHECK(ok >= 8);
    }
    const double free = std::pow(2 * std::cosh(0.25), 9);
    CHECK(std::abs(oracle::brute_z(with_uniform_field(cases[0].model, 0.5), 0.5).real() / free - 1) < 1e-12);
}

TEST_CASE("negative field by global flip") {
    std::mt19937_64 rng(4);
    auto m = oracle::random_model(Lattice::grid({2, 2}), rng);
    const double z = oracle::brute_z(with_uniform_field(m, -0.6), 0.8).real();
    auto run = estimate_partition(exact_magnetization_oracle(), m, 0.8, -0.6, 0.1, 1);
    CHECK(run.flipped);
    CHECK(std::abs(run.z_hat - z) <= 0.1 * z);
    CHECK(std::abs(biased_partition(exact_magnetization_oracle(), m, 0.8, -0.6) / z - 1) < 1e-12);
    CHECK_THROWS_AS(estimate_partition(exact_magnetization_oracle(), m, 0.8, 0.0, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_partition(exact_magnetization_oracle(), m, 0.8, 0.5, 1.5, 1), std::invalid_argument);
}

TEST_CASE("oracle noise at the finesse bound keeps the bias below eps'") {
    const double eps_prime = 0.05;
    for (double j : {1.0, -1.0}) {
        auto m = IsingModel::uniform(Lattice::grid({3, 3}), j, 0.0);
        const double beta = 0.5, h = 0.5;
        EstimatorOptions opts;
        const auto sched = schedule(h, beta, m.size(), opts.eta);
        const double f = finesse_bound(m.size(), sched.eta, eps_prime);
        const double z = oracle::brute_z(with_uniform_field(m, h), beta).real();
        for (std::uint64_t seed : {1, 2, 3}) {
            const double zbar = biased_partition(noisy_oracle(exact_magnetization_oracle(), f, seed), m, beta, h, opts);
            CHECK(std::abs(zbar - z) <= eps_prime * z);
        }
        // far coarser noise shows up as a visible bias
        const double coarse = biased_partition(noisy_oracle(exact_magnetization_oracle(), 0.5, 1), m, beta, h, opts);
        CHECK(std::abs(coarse - z) > std::abs(biased_partition(noisy_oracle(exact_magnetization_oracle(), f, 1), m, beta, h, opts) - z));
    }
}

TEST_CASE("run report") {
    auto m = IsingModel::uniform(Lattice::grid({2, 2}), 1.0, 0.0);
    auto run = estimate_partition(exact_magnetization_oracle(), m, 0.5, 0.5, 0.3, 2);
    const auto j = to_json(run);
    CHECK(j["schedule"]["L"] == run.schedule.L);
    CHECK(j["rho"].size() == std::size_t(run.schedule.L));
    CHECK(j["accounting"]["delta"] == doctest::Approx(0.1));
    CHECK(j["accounting"]["stage_confidence"].get<double>() >= 0.75);
    CHECK(j["z_hat"] == run.z_hat);
    // a stage needs at most 2^|Lambda| - 1 distinct questions
    CHECK(run.oracle_calls <= std::size_t(run.schedule.L) * 15);
}

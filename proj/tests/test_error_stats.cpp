#include "doctest.h"

#include <algorithm>
#include <random>

#include "ising_lab/error_stats.hpp"
#include "ising_lab/reconstruction.hpp"

using namespace ising_lab;

TEST_CASE("p estimates") {
    const std::vector<std::int8_t> plus(10, 1), minus(10, -1);
    std::vector<std::int8_t> half{1, -1, 1, -1};
    CHECK(estimate_p(plus) == 0.0);
    CHECK(estimate_p(minus) == 1.0);
    CHECK(estimate_p(half) == 0.5);
    CHECK_THROWS_AS(estimate_p(std::span<const std::int8_t>{}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliBatch::from_outcomes({{1, 1}, {1}}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliBatch(0, {}), std::invalid_argument);
}

TEST_CASE("moment estimates") {
    CHECK(moment_estimates(0).e2 == 0);
    CHECK(moment_estimates(0).e3 == 0);
    CHECK(std::abs(moment_estimates(0.5).e2 - 1) < 1e-15);
    CHECK(std::abs(moment_estimates(0.5).e3 - 1) < 1e-15);
    CHECK_THROWS_AS(moment_estimates(1.1), std::invalid_argument);
    // direct moments of B = mean - X
    for (double p : {0.1, 0.3, 0.77}) {
        const double mu = 1 - 2 * p;
        const double e2 = (1 - p) * std::pow(1 - mu, 2) + p * std::pow(-1 - mu, 2);
        const double e3 = (1 - p) * std::pow(std::abs(1 - mu), 3) + p * std::pow(std::abs(-1 - mu), 3);
        CHECK(std::abs(moment_estimates(p).e2 - e2) < 1e-14);
        CHECK(std::abs(moment_estimates(p).e3 - e3) < 1e-14);
    }
    // slopes stay within the Lipschitz constants 4 and 8
    double d2 = 0, d3 = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
        const double a = double(k) / n, b = double(k + 1) / n;
        d2 = std::max(d2, std::abs(moment_estimates(b).e2 - moment_estimates(a).e2) * n);
        d3 = std::max(d3, std::abs(moment_estimates(b).e3 - moment_estimates(a).e3) * n);
    }
    CHECK(d2 <= 4.0);
    CHECK(d3 <= 8.0);
    CHECK(d3 > 7.99);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0) == 0.5);
    for (double x = -8; x <= 8; x += 0.25) CHECK(std::abs(normal_cdf(-x) - (1 - normal_cdf(x))) < 1e-12);
    CHECK(std::abs(normal_cdf(1.959963984540054) - 0.975) < 1e-12);
    CHECK(normal_cdf(-40) >= 0);
}

TEST_CASE("degenerate batches are flagged") {
    BernoulliBatch b(100, {0, 100, 0});
    const std::vector<double> w{1.0, 0.5, -0.2};
    auto r = clt_bound(b, w, 0.1);
    CHECK(r.degenerate);
    CHECK(r.d_tilde == 0);
    CHECK(std::isinf(r.lambda_tilde));
    CHECK(r.bound <= 1);
    CHECK(r.confidence <= 0);
    CHECK(to_json(r)["degenerate"] == true);
}

TEST_CASE("bound limits and invariances") {
    std::mt19937_64 rng(4);
    std::vector<std::vector<std::int8_t>> shots(5, std::vector<std::int8_t>(400));
    std::bernoulli_distribution coin(0.3);
    for (auto& s : shots)
        for (auto& x : s) x = coin(rng) ? -1 : 1;
    const std::vector<double> w{0.4, -0.3, 0.2, 0.1, -0.05};
    auto r = clt_bound(BernoulliBatch::from_outcomes(shots), w, 0.05);
    CHECK_FALSE(r.degenerate);
    CHECK(r.bound <= 1);
    for (std::size_t j = 0; j < w.size(); ++j) CHECK(std::abs(r.eps[j] - r.e2[j] / 5) < 1e-15);
    // a huge window leaves only the Berry-Esseen term
    auto wide = clt_bound(BernoulliBatch::from_outcomes(shots), w, 1e6);
    CHECK(std::abs(wide.bound - (1 - 1.12 * wide.d_tilde)) < 1e-15);
    // permuting shots within an observable changes nothing
    auto shuffled = shots;
    for (auto& s : shuffled) std::shuffle(s.begin(), s.end(), rng);
    auto r2 = clt_bound(BernoulliBatch::from_outcomes(shuffled), w, 0.05);
    CHECK(r2.bound == r.bound);
    CHECK(r2.confidence == r.confidence);
    CHECK_THROWS_AS(clt_bound(BernoulliBatch::from_outcomes(shots), w, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(clt_bound(BernoulliBatch::from_outcomes(shots), std::vector<double>{1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("bound does not grow with a weight when the gaussian term dominates") {
    BernoulliBatch b(10000, {5000, 3000, 7000, 4500});
    std::vector<double> w{0.3, 0.2, -0.1, 0.25};
    double prev = 2;
    for (double x = 0.3; x < 3; x += 0.1) {
        w[0] = x;
        const double bound = clt_bound(b, w, 0.01).bound;
        CHECK(bound <= prev + 1e-15);
        prev = bound;
    }
}

TEST_CASE("hoeffding shot counts") {
    CHECK(hoeffding_m(0.1, 0.95) == 185);
    CHECK(hoeffding_m(1.0, 1e-12) == 1);
    const auto m1 = hoeffding_m(0.02, 0.99), m2 = hoeffding_m(0.04, 0.99);
    CHECK(std::abs(double(m1) / double(m2) - 4) < 0.01);
    for (double eps : {0.05, 0.2}) {
        const auto m = hoeffding_m(eps, 0.9);
        CHECK(1 - 2 * std::exp(-2 * eps * eps * m) >= 0.9);
        CHECK(1 - 2 * std::exp(-2 * eps * eps * (m - 1)) < 0.9);
    }
}

TEST_CASE("coverage study with kernel weights") {
    std::vector<double> w, p;
    const int N = 3;
    for (int j = 0; j <= 2 * N; ++j) {
        w.push_back(kernel_w(N, cplx(0, 0.5) - 2 * pi * j / (2 * N + 1)).real());
        p.push_back(0.2 + 0.1 * j);
    }
    double var = 0;
    for (int j = 0; j <= 2 * N; ++j) var += w[j] * w[j] * 4 * p[j] * (1 - p[j]) / 10000;
    auto res = coverage_study(p, w, 10000, 3 * std::sqrt(var), 200, 5, 4.0);
    CHECK(res.confident == 200);
    CHECK(res.coverage() >= res.max_bound);
    CHECK(res.max_bound > 0.5);
    CHECK(res.exact_bound >= res.max_bound);
}

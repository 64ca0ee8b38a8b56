#include "ising_lab/error_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <random>
#include <string>

#include "ising_lab/rng.hpp"

namespace ising_lab {

BernoulliBatch::BernoulliBatch(std::uint64_t shots, std::vector<std::uint64_t> minus_counts)
    : m_(shots), minus_(std::move(minus_counts)) {
    if (m_ < 1) throw std::invalid_argument("bernoulli batch: need at least one shot");
    for (auto c : minus_)
        if (c > m_) throw std::invalid_argument("bernoulli batch: tally exceeds the shot count");
}

BernoulliBatch BernoulliBatch::from_outcomes(const std::vector<std::vector<std::int8_t>>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("bernoulli batch: no observables");
    const std::size_t m = outcomes.front().size();
    std::vector<std::uint64_t> minus;
    for (const auto& seq : outcomes) {
        if (seq.size() != m) throw std::invalid_argument("bernoulli batch: sequences differ in length");
        std::uint64_t c = 0;
        for (auto x : seq) {
            if (x != 1 && x != -1) throw std::invalid_argument("bernoulli batch: outcomes must be +1 or -1");
            c += x == -1;
        }
        minus.push_back(c);
    }
    return BernoulliBatch(m, std::move(minus));
}

double BernoulliBatch::p_hat(std::size_t j) const {
    return static_cast<double>(minus_.at(j)) / static_cast<double>(m_);
}

double estimate_p(std::span<const std::int8_t> outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("estimate_p: empty batch");
    std::uint64_t minus = 0;
    for (auto x : outcomes) {
        if (x != 1 && x != -1) throw std::invalid_argument("estimate_p: outcomes must be +1 or -1");
        minus += x == -1;
    }
    return static_cast<double>(minus) / static_cast<double>(outcomes.size());
}

Moments moment_estimates(double p) {
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("moment_estimates: p must lie in [0, 1]");
    return {4 * p * (1 - p), 8 * p * (1 - 3 * p + 4 * p * p - 2 * p * p * p)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------

CLTReport clt_bound(const BernoulliBatch& batch, std::span<const double> weights, double delta, double s) {
    if (!(delta > 0)) throw std::invalid_argument("clt_bound: delta must be positive");
    if (!(s > 0)) throw std::invalid_argument("clt_bound: s must be positive");
    if (weights.size() != batch.size())
        throw std::invalid_argument("clt_bound: " + std::to_string(weights.size()) + " weights for " +
                                    std::to_string(batch.size()) + " observables");
    const double m = static_cast<double>(batch.shots());
    CLTReport r;
    r.delta = delta;
    r.s = s;
    double num = 0, lower = 0, upper = 0, hoeffding = 1, pathological = 1;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const double p = batch.p_hat(j);
        const auto mom = moment_estimates(p);
        const double eps = mom.e2 / (4 + s);
        const double w = std::abs(weights[j]);
        r.p_hat.push_back(p);
        r.e2.push_back(mom.e2);
        r.e3.push_back(mom.e3);
        r.eps.push_back(eps);
        r.estimate += weights[j] * (1 - 2 * p);
        num += w * w * w * (mom.e3 + 8 * eps);
        lower += w * w * (mom.e2 - 4 * eps);
        upper += w * w * (mom.e2 + 4 * eps);
        hoeffding *= 1 - 2 * std::exp(-eps * eps * m);
        // P(all shots agree) = p^M + (1-p)^M, in logs to avoid underflow surprises
        pathological *= std::exp(m * std::log(p)) + std::exp(m * std::log1p(-p));
    }
    r.variance_floor = lower;
    r.confidence = hoeffding - pathological;
    if (lower <= 0) {
        r.degenerate = true;
        r.d_tilde = 0;
        r.lambda_tilde = -std::numeric_limits<double>::infinity();
    } else {
        r.d_tilde = num / (std::sqrt(m) * std::pow(lower, 1.5));
        r.lambda_tilde = std::sqrt(m) / std::sqrt(upper);
    }
    r.bound = 1 - 2 * normal_cdf(-r.lambda_tilde * delta) - 2 * berry_esseen_constant * r.d_tilde;
    return r;
}

double exact_clt_bound(std::span<const double> p, std::span<const double> weights, std::uint64_t shots, double delta) {
    if (p.size() != weights.size()) throw std::invalid_argument("exact_clt_bound: size mismatch");
    if (shots < 1 || !(delta > 0)) throw std::invalid_argument("exact_clt_bound: need shots >= 1 and delta > 0");
    double num = 0, var = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const auto mom = moment_estimates(p[j]);
        const double w = std::abs(weights[j]);
        num += w * w * w * mom.e3;
        var += w * w * mom.e2;
    }
    if (var <= 0) return 1;  // the estimate is exact
    const double m = static_cast<double>(shots);
    const double d = num / (std::sqrt(m) * std::pow(var, 1.5));
    return 1 - 2 * normal_cdf(-std::sqrt(m / var) * delta) - 2 * berry_esseen_constant * d;
}

std::uint64_t hoeffding_m(double epsilon, double confidence) {
    if (!(epsilon > 0)) throw std::invalid_argument("hoeffding_m: epsilon must be positive");
    if (!(confidence < 1)) throw std::invalid_argument("hoeffding_m: confidence must be below 1");
    const double m = std::log(2 / (1 - confidence)) / (2 * epsilon * epsilon);
    return m <= 1 ? 1 : static_cast<std::uint64_t>(std::ceil(m));
}

nlohmann::json to_json(const CLTReport& r) {
    nlohmann::json j;
    j["p_hat"] = r.p_hat;
    j["e2"] = r.e2;
    j["e3"] = r.e3;
    j["eps"] = r.eps;
    j["estimate"] = r.estimate;
    j["delta"] = r.delta;
    j["s"] = r.s;
    j["variance_floor"] = r.variance_floor;
    j["d_tilde"] = r.d_tilde;
    j["lambda_tilde"] = std::isfinite(r.lambda_tilde) ? nlohmann::json(r.lambda_tilde) : nlohmann::json("-inf");
    j["bound"] = r.bound;
    j["confidence"] = r.confidence;
    j["degenerate"] = r.degenerate;
    return j;
}

CoverageResult coverage_study(std::span<const double> p, std::span<const double> weights, std::uint64_t shots,
                              double delta, int replications, std::uint64_t seed, double s,
                              double confidence_threshold) {
    if (p.size() != weights.size()) throw std::invalid_argument("coverage_study: size mismatch");
    if (replications < 1) throw std::invalid_argument("coverage_study: need at least one replication");
    double truth = 0;
    for (std::size_t j = 0; j < p.size(); ++j) truth += weights[j] * (1 - 2 * p[j]);
    CoverageResult out;
    out.replications = replications;
    out.exact_bound = exact_clt_bound(p, weights, shots, delta);
    double bound_sum = 0;
    for (int r = 0; r < replications; ++r) {
        StreamRng rng(seed, static_cast<std::uint64_t>(r));
        std::vector<std::uint64_t> minus;
        for (double pj : p) minus.push_back(std::binomial_distribution<std::uint64_t>(shots, pj)(rng));
        const auto rep = clt_bound(BernoulliBatch(shots, std::move(minus)), weights, delta, s);
        if (std::abs(rep.estimate - truth) < delta) ++out.covered;
        if (rep.confidence > confidence_threshold) {
            ++out.confident;
            bound_sum += rep.bound;
            out.max_bound = out.confident == 1 ? rep.bound : std::max(out.max_bound, rep.bound);
        }
    }
    if (out.confident) out.mean_bound = bound_sum / out.confident;
    return out;
}

}  // namespace ising_lab

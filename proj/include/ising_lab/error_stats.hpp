#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Bernoulli tallies
// ---------------------------------------------------------------------------

// M shots of +-1 outcomes for each of several observables. Only the number of
// -1 outcomes matters to the estimators, so that is all we keep.
class BernoulliBatch {
public:
    BernoulliBatch(std::uint64_t shots, std::vector<std::uint64_t> minus_counts);
    static BernoulliBatch from_outcomes(const std::vector<std::vector<std::int8_t>>& outcomes);

    std::uint64_t shots() const noexcept { return m_; }
    std::size_t size() const noexcept { return minus_.size(); }
    const std::vector<std::uint64_t>& minus_counts() const noexcept { return minus_; }
    double p_hat(std::size_t j) const;
    double mean(std::size_t j) const { return 1 - 2 * p_hat(j); }

private:
    std::uint64_t m_;
    std::vector<std::uint64_t> minus_;
};

// (1/M) sum X = 1 - 2 p_hat
double estimate_p(std::span<const std::int8_t> outcomes);

struct Moments {
    double e2;  // E (B - EB)^2 for a +-1 variable with P(-1) = p
    double e3;  // E |B - EB|^3
};

Moments moment_estimates(double p);

double normal_cdf(double x);

// ---------------------------------------------------------------------------
// Confidence bound for sum_j w_j mean_j
// ---------------------------------------------------------------------------

struct CLTReport {
    std::vector<double> p_hat, e2, e3, eps;
    double estimate = 0;     // sum_j w_j (1 - 2 p_hat_j)
    double delta = 0;
    double s = 1;
    double variance_floor = 0;  // V_M
    double d_tilde = 0;
    double lambda_tilde = 0;    // -inf when degenerate
    double bound = 0;           // lower bound on P(|estimate - truth| < delta)
    double confidence = 0;      // probability that the bound holds, with p_hat in the pathological term
    bool degenerate = false;
};

inline constexpr double berry_esseen_constant = 0.56;

CLTReport clt_bound(const BernoulliBatch& batch, std::span<const double> weights, double delta, double s = 1.0);

// the same bound evaluated with the true probabilities in place of estimates
// (eps_j = 0): the deterministic Berry-Esseen statement
double exact_clt_bound(std::span<const double> p, std::span<const double> weights, std::uint64_t shots, double delta);

// smallest M with 1 - 2 exp(-2 eps^2 M) >= confidence
std::uint64_t hoeffding_m(double epsilon, double confidence);

nlohmann::json to_json(const CLTReport& report);

// ---------------------------------------------------------------------------
// Coverage simulation
// ---------------------------------------------------------------------------

struct CoverageResult {
    int replications = 0;
    int covered = 0;            // replications with |estimate - truth| < delta
    int confident = 0;          // replications with confidence > threshold
    double max_bound = 0;       // largest bound among the confident replications
    double mean_bound = 0;      // over the confident replications
    double exact_bound = 0;     // exact_clt_bound for the true p
    double coverage() const { return replications ? double(covered) / replications : 0.0; }
};

// Draws `replications` batches of M shots with P(-1) = p_j, forms the weighted
// estimate and its report each time.
CoverageResult coverage_study(std::span<const double> p, std::span<const double> weights, std::uint64_t shots,
                              double delta, int replications, std::uint64_t seed, double s = 1.0,
                              double confidence_threshold = 0.99);

}  // namespace ising_lab

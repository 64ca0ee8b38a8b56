#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ising_lab/ising_model.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Field schedule and sample counts
// ---------------------------------------------------------------------------

// h_0 = 0 < h_1 < ... < h_L = h with spacing dh. The nominal spacing is
// eta / (beta |Lambda|); L is rounded up and dh recomputed as h / L, so the
// realized eta = beta |Lambda| dh never exceeds the requested one.
struct FieldSchedule {
    std::vector<double> fields;
    double dh = 0;
    double eta = 0;  // realized
    int L = 0;
};

FieldSchedule schedule(double h, double beta, int lattice_size, double eta);

// smallest n with (1 - 2 exp(-2 n zeta^2 / sinh^2 eta))^L >= 3/4,
// zeta = ln(1 + delta) / (L e^eta)
std::uint64_t sample_count(int L, double eta, double delta);
// the confidence reached by n samples per stage
double stage_confidence(std::uint64_t n, int L, double eta, double delta);

// largest relative error of the conditional magnetizations that keeps the
// sampling bias below eps'
double finesse_bound(int lattice_size, double eta, double eps_prime);

// ---------------------------------------------------------------------------
// Magnetization oracles and sequential sampling
// ---------------------------------------------------------------------------

// Any magnetization source fits here: exact enumeration, a Monte Carlo run or
// measured data. It is called with the model at the current stage field, the
// spins fixed so far and the site to measure, and must return a value in [-1, 1].
// The sampler asks each (pinning, site) question once and reuses the answer,
// so noisy sources should be deterministic per question.
struct MagnetizationOracle {
    std::function<double(const IsingModel&, double beta, const PinnedSet&, int site)> measure;
    double finesse = 0;  // declared bound on |m' - m| / (1 - |m|)
};

MagnetizationOracle exact_magnetization_oracle(const EnumerationOptions& opts = {});

// Perturbs every answer of `base` by f (1 - |m|) u with u in [-1, 1] fixed by
// a hash of the question and the seed. Used to probe the finesse bound.
MagnetizationOracle noisy_oracle(MagnetizationOracle base, double finesse, std::uint64_t seed);

// Boustrophedon order on a 2D grid (row by row, alternating direction);
// identity order on anything else.
std::vector<int> snake_order(const Lattice& lattice);

// Draws configurations site by site from the conditional magnetizations.
// Oracle answers are cached per prefix; a sampler serves one (model, beta).
class SequentialSampler {
public:
    SequentialSampler(MagnetizationOracle oracle, IsingModel model, double beta, std::vector<int> order = {});

    const std::vector<int>& order() const noexcept { return order_; }
    const IsingModel& model() const noexcept { return model_; }

    SpinConfiguration draw(std::uint64_t seed, std::uint64_t stream);
    // conditional magnetization after `depth` sites of the order are fixed to
    // the spins encoded in `prefix` (bit d set means the d-th site is down)
    double conditional(int depth, std::uint64_t prefix);
    // probability of a full configuration under the sampled distribution
    double probability(const SpinConfiguration& config);

    std::size_t oracle_calls() const noexcept { return cache_.size(); }

private:
    MagnetizationOracle oracle_;
    IsingModel model_;
    double beta_;
    std::vector<int> order_;
    std::unordered_map<std::uint64_t, double> cache_;
};

SpinConfiguration sequential_sample(const MagnetizationOracle& oracle, const IsingModel& model, double beta,
                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Telescoping estimator
// ---------------------------------------------------------------------------

// model with h added to every field
IsingModel with_uniform_field(const IsingModel& model, double h);

struct EstimatorOptions {
    double eta = 0.5;
    double delta = -1;      // statistical part of eps; negative means eps / 3
    double eps_prime = -1;  // sampling bias part of eps; negative means eps / 3
    std::vector<int> order; // empty means snake_order
    EnumerationOptions enumeration;
};

struct EstimatorRun {
    FieldSchedule schedule;
    std::uint64_t n = 0;        // samples per stage
    std::vector<double> rho;    // per-stage ratio estimates
    double z0 = 0;              // exact Z at zero added field
    double z_hat = 0;
    double eps = 0, delta = 0, eps_prime = 0;
    double confidence = 0;      // stage_confidence(n, L, eta, delta)
    double required_finesse = 0;
    double oracle_finesse = 0;
    bool flipped = false;       // h < 0 was mapped to -h by a global flip
    std::size_t oracle_calls = 0;
};

// Estimates Z(beta) of `model` with h added to every site field. Draw i of
// stage k uses stream (k << 40) | i of `seed`.
EstimatorRun estimate_partition(const MagnetizationOracle& oracle, const IsingModel& model, double beta, double h,
                                double eps, std::uint64_t seed, const EstimatorOptions& opts = {});

// Z(h_0) prod_k E'[rho_k]: the value the estimator concentrates on when the
// stage distributions are those drawn by the oracle. Enumerates every
// configuration, so only for small lattices.
double biased_partition(const MagnetizationOracle& oracle, const IsingModel& model, double beta, double h,
                        const EstimatorOptions& opts = {});

nlohmann::json to_json(const EstimatorRun& run);

}  // namespace ising_lab

#include "ising_lab/fpras.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ising_lab/rng.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

FieldSchedule schedule(double h, double beta, int lattice_size, double eta) {
    if (!(h > 0)) throw std::invalid_argument("schedule: h must be positive (mirror negative fields first)");
    if (!(beta > 0)) throw std::invalid_argument("schedule: beta must be positive");
    if (!(eta > 0)) throw std::invalid_argument("schedule: eta must be positive");
    if (lattice_size < 1) throw std::invalid_argument("schedule: empty lattice");
    const double steps = h * beta * lattice_size / eta;
    // guard against 9.000000001 rounding up to 10
    const double rounded = std::ceil(steps - 1e-9 * std::max(1.0, steps));
    if (rounded > 1e7) throw std::invalid_argument("schedule: more than 1e7 stages");
    FieldSchedule s;
    s.L = std::max(1, static_cast<int>(rounded));
    s.dh = h / s.L;
    s.eta = beta * lattice_size * s.dh;
    s.fields.resize(s.L + 1);
    for (int k = 0; k <= s.L; ++k) s.fields[k] = k == s.L ? h : k * s.dh;
    return s;
}

namespace {

double zeta_of(int L, double eta, double delta) { return std::log1p(delta) / (L * std::exp(eta)); }

void check_count_args(int L, double eta, double delta) {
    if (L < 1) throw std::invalid_argument("sample_count: L must be at least 1");
    if (!(eta > 0)) throw std::invalid_argument("sample_count: eta must be positive");
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("sample_count: delta must lie in (0, 1)");
}

}  // namespace

std::uint64_t sample_count(int L, double eta, double delta) {
    check_count_args(L, eta, delta);
    const double sh = std::sinh(eta);
    const double lg = std::log1p(delta);
    // 1 - (3/4)^(1/L) without cancellation for large L
    const double tail = -std::expm1(std::log(0.75) / L);
    const double n = -sh * sh * std::exp(2 * eta) * L * double(L) / (2 * lg * lg) * std::log(0.5 * tail);
    auto c = static_cast<std::uint64_t>(std::ceil(n));
    // the closed form is exact; nudge for rounding in either direction
    while (c > 1 && stage_confidence(c - 1, L, eta, delta) >= 0.75) --c;
    while (stage_confidence(c, L, eta, delta) < 0.75) ++c;
    return std::max<std::uint64_t>(c, 1);
}

double stage_confidence(std::uint64_t n, int L, double eta, double delta) {
    check_count_args(L, eta, delta);
    const double z = zeta_of(L, eta, delta), sh = std::sinh(eta);
    const double per = 1 - 2 * std::exp(-2.0 * double(n) * z * z / (sh * sh));
    if (per <= 0) return 0;
    return std::exp(L * std::log(per));
}

double finesse_bound(int lattice_size, double eta, double eps_prime) {
    if (lattice_size < 1) throw std::invalid_argument("finesse_bound: empty lattice");
    if (!(eps_prime > 0)) throw std::invalid_argument("finesse_bound: eps' must be positive");
    const double n = lattice_size;
    return std::log1p(2 * std::exp(-2 * eta) / n * std::log1p(eps_prime)) / n;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

MagnetizationOracle exact_magnetization_oracle(const EnumerationOptions& opts) {
    return {[opts](const IsingModel& m, double beta, const PinnedSet& pinned, int site) {
                return corner_magnetization(m, beta, pinned, site, opts);
            },
            0.0};
}

MagnetizationOracle noisy_oracle(MagnetizationOracle base, double finesse, std::uint64_t seed) {
    if (!(finesse >= 0 && finesse < 1)) throw std::invalid_argument("noisy_oracle: finesse must lie in [0, 1)");
    auto inner = std::move(base.measure);
    MagnetizationOracle out;
    out.finesse = base.finesse + finesse;
    out.measure = [inner, finesse, seed](const IsingModel& m, double beta, const PinnedSet& pinned, int site) {
        const double exact = inner(m, beta, pinned, site);
        std::uint64_t key = CounterRng::mix(static_cast<std::uint64_t>(site));
        for (const auto& [s, v] : pinned) key = CounterRng::mix(key ^ (std::uint64_t(s) * 2 + (v < 0)));
        double fsum = 0;
        for (double f : m.fields) fsum += f;
        key = CounterRng::mix(key ^ std::bit_cast<std::uint64_t>(fsum) ^ std::bit_cast<std::uint64_t>(beta));
        const double u = 2 * CounterRng(seed, key).uniform(0) - 1;
        return std::clamp(exact + finesse * (1 - std::abs(exact)) * u, -1.0, 1.0);
    };
    return out;
}

std::vector<int> snake_order(const Lattice& lattice) {
    std::vector<int> order;
    const auto& shape = lattice.shape();
    if (shape && shape->extents.size() == 2) {
        const int w = shape->extents[0], rows = shape->extents[1];
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < w; ++c) order.push_back(r * w + (r % 2 == 0 ? c : w - 1 - c));
        return order;
    }
    for (int i = 0; i < lattice.size(); ++i) order.push_back(i);
    return order;
}

// ---------------------------------------------------------------------------
// Sequential sampler
// ---------------------------------------------------------------------------

SequentialSampler::SequentialSampler(MagnetizationOracle oracle, IsingModel model, double beta,
                                     std::vector<int> order)
    : oracle_(std::move(oracle)), model_(std::move(model)), beta_(beta), order_(std::move(order)) {
    if (!oracle_.measure) throw std::invalid_argument("SequentialSampler: oracle has no measure function");
    const int n = model_.size();
    if (n > 63) throw std::invalid_argument("SequentialSampler: at most 63 sites");
    if (order_.empty()) order_ = snake_order(model_.lattice);
    auto sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i)
        if (static_cast<int>(sorted.size()) != n || sorted[i] != i)
            throw std::invalid_argument("SequentialSampler: order is not a permutation of the sites");
}

double SequentialSampler::conditional(int depth, std::uint64_t prefix) {
    const std::uint64_t key = (std::uint64_t{1} << depth) | prefix;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    PinnedSet pinned;
    for (int d = 0; d < depth; ++d) pinned[order_[d]] = spin_of(prefix, d);
    const double m = oracle_.measure(model_, beta_, pinned, order_[depth]);
    if (!(m >= -1 && m <= 1))
        throw std::invalid_argument("SequentialSampler: oracle returned " + std::to_string(m) + " for site " +
                                    std::to_string(order_[depth]));
    cache_.emplace(key, m);
    return m;
}

SpinConfiguration SequentialSampler::draw(std::uint64_t seed, std::uint64_t stream) {
    const int n = model_.size();
    CounterRng rng(seed, stream);
    std::uint64_t prefix = 0;
    SpinConfiguration out(n);
    for (int d = 0; d < n; ++d) {
        const double m = conditional(d, prefix);
        const int s = rng.sign(static_cast<std::uint64_t>(d), (1 + m) / 2);
        if (s < 0) prefix |= std::uint64_t{1} << d;
        out.set(order_[d], s);
    }
    return out;
}

double SequentialSampler::probability(const SpinConfiguration& config) {
    if (config.length() != model_.size()) throw std::invalid_argument("SequentialSampler: configuration length");
    double p = 1;
    std::uint64_t prefix = 0;
    for (int d = 0; d < model_.size() && p > 0; ++d) {
        const double m = conditional(d, prefix);
        const int s = config.spin(order_[d]);
        p *= (1 + s * m) / 2;
        if (s < 0) prefix |= std::uint64_t{1} << d;
    }
    return p;
}

SpinConfiguration sequential_sample(const MagnetizationOracle& oracle, const IsingModel& model, double beta,
                                    std::uint64_t seed) {
    SequentialSampler sampler(oracle, model, beta);
    return sampler.draw(seed, 0);
}

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

IsingModel with_uniform_field(const IsingModel& model, double h) {
    IsingModel out = model;
    for (auto& f : out.fields) f += h;
    return out;
}

namespace {

struct Prepared {
    IsingModel base;
    double h;
    bool flipped;
    FieldSchedule sched;
    std::vector<int> order;
};

Prepared prepare(const IsingModel& model, double beta, double h, const EstimatorOptions& opts) {
    if (model.fields.size() != std::size_t(model.size())) throw std::invalid_argument("estimate_partition: field count");
    if (h == 0) throw std::invalid_argument("estimate_partition: h = 0 needs no schedule");
    Prepared p{model, h, false, {}, opts.order};
    if (h < 0) {
        // Z(J, b, h) = Z(J, -b, -h) under s -> -s
        for (auto& f : p.base.fields) f = -f;
        p.h = -h;
        p.flipped = true;
    }
    p.sched = schedule(p.h, beta, model.size(), opts.eta);
    if (p.order.empty()) p.order = snake_order(model.lattice);
    return p;
}

double total_spin(const SpinConfiguration& c) {
    const int down = std::popcount(c.bits());
    return c.length() - 2.0 * down;
}

}  // namespace

EstimatorRun estimate_partition(const MagnetizationOracle& oracle, const IsingModel& model, double beta, double h,
                                double eps, std::uint64_t seed, const EstimatorOptions& opts) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("estimate_partition: eps must lie in (0, 1)");
    EstimatorRun run;
    run.eps = eps;
    run.delta = opts.delta < 0 ? eps / 3 : opts.delta;
    run.eps_prime = opts.eps_prime < 0 ? eps / 3 : opts.eps_prime;
    if (run.delta + run.eps_prime + run.delta * run.eps_prime > eps * (1 + 1e-12))
        throw std::invalid_argument("estimate_partition: eps < delta + eps' + delta eps'");
    const auto p = prepare(model, beta, h, opts);
    run.flipped = p.flipped;
    run.schedule = p.sched;
    run.n = sample_count(p.sched.L, p.sched.eta, run.delta);
    run.confidence = stage_confidence(run.n, p.sched.L, p.sched.eta, run.delta);
    run.required_finesse = finesse_bound(model.size(), p.sched.eta, run.eps_prime);
    run.oracle_finesse = oracle.finesse;
    run.z0 = partition_function(p.base, beta, Method::enumerate, opts.enumeration).real();

    double log_z = std::log(run.z0);
    const double step = beta * p.sched.dh;
    for (int k = 1; k <= p.sched.L; ++k) {
        SequentialSampler sampler(oracle, with_uniform_field(p.base, p.sched.fields[k - 1]), beta, p.order);
        double sum = 0;
        for (std::uint64_t i = 0; i < run.n; ++i) {
            // stream layout: stage in the high bits, draw index in the low ones
            const auto c = sampler.draw(seed, (std::uint64_t(k) << 40) | i);
            sum += std::exp(step * total_spin(c));
        }
        const double rho = sum / double(run.n);
        run.rho.push_back(rho);
        run.oracle_calls += sampler.oracle_calls();
        log_z += std::log(rho);
    }
    run.z_hat = std::exp(log_z);
    return run;
}

double biased_partition(const MagnetizationOracle& oracle, const IsingModel& model, double beta, double h,
                        const EstimatorOptions& opts) {
    const auto p = prepare(model, beta, h, opts);
    const int n = model.size();
    if (n > 20) throw CapExceeded("biased_partition: enumerates 2^n configurations, n <= 20");
    double log_z = std::log(partition_function(p.base, beta, Method::enumerate, opts.enumeration).real());
    const double step = beta * p.sched.dh;
    for (int k = 1; k <= p.sched.L; ++k) {
        SequentialSampler sampler(oracle, with_uniform_field(p.base, p.sched.fields[k - 1]), beta, p.order);
        double mean = 0;
        for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
            SpinConfiguration c(n, b);
            mean += sampler.probability(c) * std::exp(step * total_spin(c));
        }
        log_z += std::log(mean);
    }
    return std::exp(log_z);
}

nlohmann::json to_json(const EstimatorRun& run) {
    nlohmann::json j;
    j["schedule"] = {{"L", run.schedule.L}, {"dh", run.schedule.dh}, {"eta", run.schedule.eta},
                     {"fields", run.schedule.fields}};
    j["samples_per_stage"] = run.n;
    j["rho"] = run.rho;
    j["z0"] = run.z0;
    j["z_hat"] = run.z_hat;
    j["accounting"] = {{"eps", run.eps},
                       {"delta", run.delta},
                       {"eps_prime", run.eps_prime},
                       {"stage_confidence", run.confidence},
                       {"required_finesse", run.required_finesse},
                       {"oracle_finesse", run.oracle_finesse}};
    j["flipped"] = run.flipped;
    j["oracle_calls"] = run.oracle_calls;
    return j;
}

}  // namespace ising_lab

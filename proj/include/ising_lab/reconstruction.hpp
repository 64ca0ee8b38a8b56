#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ising_lab/circuit.hpp"
#include "ising_lab/ising_model.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Kernels and sample grids
// ---------------------------------------------------------------------------

// sin((2N+1)x/2) / ((2N+1) sin(x/2)), equal to 1 at x = 0 (mod 2 pi)
cplx kernel_w(int N, cplx x);

// (1 - q^(N+1)) / (1 - q), equal to N+1 at q = 1
cplx geometric_sum(int N, cplx q);

enum class AxisKind {
    two_sided,  // frequencies -N..N, nodes 2 pi j / (2N+1), j = 0..2N
    one_sided,  // frequencies 0..N, nodes 2 pi j / (N+1), j = 0..N
};

struct Axis {
    AxisKind kind = AxisKind::two_sided;
    int N = 0;
    int nodes = 0;  // 0 means the exact count; more nodes is the least-squares mode

    static Axis two_sided(int N) { return {AxisKind::two_sided, N, 0}; }
    static Axis one_sided(int N) { return {AxisKind::one_sided, N, 0}; }

    int exact_count() const noexcept { return kind == AxisKind::two_sided ? 2 * N + 1 : N + 1; }
    int count() const noexcept { return nodes > 0 ? nodes : exact_count(); }
    bool oversampled() const noexcept { return count() != exact_count(); }
    double node(int j) const;
    int lowest_frequency() const noexcept { return kind == AxisKind::two_sided ? -N : 0; }
    int frequency_count() const noexcept { return exact_count(); }
};

// Samples over the tensor product of the axes, axis 0 varying fastest.
struct SampleGrid {
    std::vector<Axis> axes;
    std::vector<cplx> values;
    std::vector<double> sigma;  // per sample; empty if unknown
    bool least_squares = false; // must be set to accept oversampled axes

    std::size_t size() const;
    std::vector<int> index(std::size_t flat) const;
    std::vector<double> angles(std::size_t flat) const;
};

void validate(const SampleGrid& grid);

// A point to continue to, one entry per axis, given as the multiplier
// u = e^{i x} (so complex angles x are allowed).
using Target = std::vector<cplx>;
Target target_from_angles(std::span<const cplx> angles);

// Coefficients c over the frequency box, axis 0 fastest; frequencies of axis a
// run from lowest_frequency() upwards.
std::vector<cplx> fourier_coefficients(const SampleGrid& grid);
cplx synthesize(std::span<const Axis> axes, std::span<const cplx> coefficients, const Target& target);
cplx continue_to(const SampleGrid& grid, const Target& target);

// weight of sample j in continue_to, per axis
std::vector<cplx> axis_weights(const Axis& axis, cplx multiplier);

// ---------------------------------------------------------------------------
// Wick targets
// ---------------------------------------------------------------------------

// alpha* = -i beta continues e^{i alpha S} to e^{beta S}; theta* continues the
// rotation coupling to the vertical coupling beta J. g satisfies
// A(alpha*, theta*) = e^{(rotation layers) * sites * g} Z(beta) / 2^sites.
struct WickTarget {
    cplx alpha;
    cplx theta;
    cplx g;
};

WickTarget wick_targets(double beta, double vertical_coupling);
cplx wick_g(cplx theta);

// Sum_j |w^(N)(i beta - alpha_j)| * sigma_max for a one-axis two-sided grid.
double apriori_error(int N, double beta, double sigma_max);

// ---------------------------------------------------------------------------
// Exponential series
// ---------------------------------------------------------------------------

// Z(beta) = sum_p d_p e^{p beta}; evaluation shifts by the largest exponent.
class ExponentialSeries {
public:
    ExponentialSeries() = default;
    ExponentialSeries(std::vector<double> exponents, std::vector<cplx> coefficients);

    const std::vector<double>& exponents() const noexcept { return p_; }
    const std::vector<cplx>& coefficients() const noexcept { return d_; }

    cplx value(double beta) const;
    cplx derivative(double beta, int order) const;
    // k-th derivative divided by the value, computed without overflow
    cplx log_ratio(double beta, int order) const;
    double log_abs(double beta) const;

private:
    std::vector<double> p_;
    std::vector<cplx> d_;
};

struct Thermodynamics {
    double log_z_per_beta;  // ln Z / (N beta), the negative free energy per spin
    double energy;          // per spin
    double specific_heat;   // per spin
};

Thermodynamics thermodynamics(const ExponentialSeries& z, double beta, int spins);

// ---------------------------------------------------------------------------
// Reconstruction plans
// ---------------------------------------------------------------------------

// Linear map from grid samples to the coefficients of Z(beta) as an
// exponential series. Built once per layout; reused for every noise draw.
class ReconstructionPlan {
public:
    ReconstructionPlan(std::vector<Axis> axes, std::vector<double> exponents, std::vector<std::vector<cplx>> map);

    const std::vector<Axis>& axes() const noexcept { return axes_; }
    std::size_t sample_count() const noexcept { return samples_; }
    const std::vector<double>& exponents() const noexcept { return exponents_; }

    ExponentialSeries series(std::span<const cplx> samples) const;
    // W_j(beta) with Z(beta) = sum_j W_j F_j
    std::vector<cplx> sample_weights(double beta) const;
    // standard deviation of Re Z(beta) for independent noise of the given size
    // on the real and imaginary part of each sample
    double sigma(double beta, std::span<const double> sample_sigma) const;
    // sum_j |W_j(beta)| sigma_j
    double apriori_error(double beta, std::span<const double> sample_sigma) const;
    // per exponent: standard deviation of Re d_p
    std::vector<double> coefficient_sigma(std::span<const double> sample_sigma) const;

private:
    std::vector<Axis> axes_;
    std::size_t samples_ = 0;
    std::vector<double> exponents_;
    std::vector<std::vector<cplx>> map_;  // [exponent][sample]
};

// One time step: a single diagonal layer with integer couplings and fields,
// A(alpha) = 2^{-n} sum exp(i alpha S), S = -H.
struct OneStepProblem {
    IsingModel model;

    int bandwidth() const;  // sum |J| + sum |h|
    SampleGrid sample(unsigned threads = 1) const;
    ReconstructionPlan plan() const;
};

// Layered program with integer in-slice couplings/fields and a uniform
// vertical coupling: axes (alpha, theta), both two-sided.
struct UniformLayeredProblem {
    Lattice slice;
    std::vector<std::vector<double>> couplings;  // per slice, integer
    std::vector<std::vector<double>> fields;     // per slice, integer
    double vertical = 1.0;

    int slices() const { return static_cast<int>(couplings.size()); }
    int alpha_bandwidth() const;
    int theta_bandwidth() const;  // number of vertical bonds
    IsingModel classical_model() const;
    LayeredSpec program_at(cplx alpha, cplx theta) const;
    SampleGrid sample(unsigned threads = 1) const;
    ReconstructionPlan plan() const;
};

// Layered program with G gates between slices, vertical couplings +-1:
// axes (alpha two-sided, theta+ one-sided, theta- one-sided).
struct DisorderedProblem {
    Lattice slice;
    std::vector<std::vector<double>> couplings;  // per slice, integer
    std::vector<std::vector<double>> fields;     // per slice, integer
    std::vector<std::vector<int>> vertical;      // per gap, per site, +1 or -1

    int slices() const { return static_cast<int>(couplings.size()); }
    int alpha_bandwidth() const;
    int ferro_count() const;
    int antiferro_count() const;
    IsingModel classical_model() const;
    CircuitProgram program_at(cplx alpha, cplx theta_plus, cplx theta_minus) const;
    SampleGrid sample(unsigned threads = 1) const;
    ReconstructionPlan plan() const;
};

// Splits a grid model into slices along its last axis (the time direction).
UniformLayeredProblem uniform_problem_from_grid(const IsingModel& model);
DisorderedProblem disordered_problem_from_grid(const IsingModel& model);

// ---------------------------------------------------------------------------
// Coefficients and error studies
// ---------------------------------------------------------------------------

struct XiEstimate {
    std::vector<long long> k;     // energies, ascending
    std::vector<double> xi;       // estimate of the number of states with energy k
    std::vector<double> sigma;    // standard deviation of each estimate
    long long ground_bound = 0;   // lowest k with xi > sigma
    bool bound_found = false;
};

// Z(beta) = sum_k xi_k e^{-k beta}; requires integer exponents in the plan.
XiEstimate xi_with_errors(const ReconstructionPlan& plan, std::span<const cplx> samples,
                          std::span<const double> sample_sigma);

// adds independent N(0, sigma^2) noise to the real and imaginary part of every
// sample; draw d of a study uses stream d
std::vector<cplx> add_noise(std::span<const cplx> samples, double sigma, std::uint64_t seed, std::uint64_t stream);

struct NoiseStudyRow {
    double beta;
    Thermodynamics truth;
    Thermodynamics mean;
    Thermodynamics standard_error;  // of the mean over draws
    double z_true;
    double z_mean;
    double z_sigma;       // propagated standard deviation of Re Z
    double z_apriori;     // sum_j |W_j| sigma
    int covered = 0;      // draws with |Z_hat - Z| <= z_apriori
    int draws = 0;
};

std::vector<NoiseStudyRow> noise_study(const ReconstructionPlan& plan, std::span<const cplx> exact_samples,
                                       const ExponentialSeries& truth, int spins, std::span<const double> betas,
                                       double sigma, int draws, std::uint64_t seed);

// Protocol 1 data |A(alpha)|^2 = A(alpha) A(-alpha) is band-limited with twice
// the bandwidth; continuing to alpha = -i beta gives Z(beta) Z(-beta) / 4^n.
ReconstructionPlan squared_one_step_plan(int sites, int bandwidth);
SampleGrid sample_squared_one_step(const OneStepProblem& problem);

}  // namespace ising_lab

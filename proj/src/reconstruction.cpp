#include "ising_lab/reconstruction.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "ising_lab/rng.hpp"

namespace ising_lab {

namespace {

constexpr cplx I{0.0, 1.0};

bool is_integer(double x) { return std::isfinite(x) && x == std::round(x); }

int integer_bandwidth(const std::vector<std::vector<double>>& couplings,
                      const std::vector<std::vector<double>>& fields, const char* who) {
    long long total = 0;
    for (const auto* group : {&couplings, &fields})
        for (const auto& slice : *group)
            for (double v : slice) {
                if (!is_integer(v)) throw std::invalid_argument(std::string(who) + ": couplings and fields must be integers");
                total += std::llabs(static_cast<long long>(v));
            }
    if (total > 100000) throw std::invalid_argument(std::string(who) + ": bandwidth too large");
    return static_cast<int>(total);
}

// coefficients of (1 + x)^a (1 - x)^b in powers of x
std::vector<double> binomial_product(int a, int b) {
    std::vector<double> poly{1.0};
    auto times = [&](double sign) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t r = 0; r < poly.size(); ++r) {
            next[r] += poly[r];
            next[r + 1] += sign * poly[r];
        }
        poly.swap(next);
    };
    for (int k = 0; k < a; ++k) times(1.0);
    for (int k = 0; k < b; ++k) times(-1.0);
    return poly;
}

// phase e^{-i (nu . x_j)} / prod(count) for every sample j of the grid
std::vector<cplx> fourier_row(const std::vector<Axis>& axes, const std::vector<int>& nu) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.count();
    std::vector<cplx> row(total);
    std::vector<std::vector<cplx>> per_axis;
    double norm = 1;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        std::vector<cplx> v(axes[k].count());
        for (int j = 0; j < axes[k].count(); ++j) v[j] = std::exp(-I * double(nu[k]) * axes[k].node(j));
        per_axis.push_back(std::move(v));
        norm *= axes[k].count();
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        cplx x = 1.0 / norm;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            x *= per_axis[k][rem % axes[k].count()];
            rem /= axes[k].count();
        }
        row[flat] = x;
    }
    return row;
}

// Accumulates map rows keyed by exponent.
class MapBuilder {
public:
    explicit MapBuilder(std::size_t samples) : samples_(samples) {}
    void add(double exponent, cplx scale, const std::vector<cplx>& row) {
        auto& dst = rows_[exponent];
        if (dst.empty()) dst.assign(samples_, cplx(0));
        for (std::size_t j = 0; j < samples_; ++j) dst[j] += scale * row[j];
    }
    ReconstructionPlan finish(std::vector<Axis> axes) {
        std::vector<double> exps;
        std::vector<std::vector<cplx>> map;
        for (auto& [p, r] : rows_) {
            exps.push_back(p);
            map.push_back(std::move(r));
        }
        return ReconstructionPlan(std::move(axes), std::move(exps), std::move(map));
    }

private:
    std::size_t samples_;
    std::map<double, std::vector<cplx>> rows_;
};

std::size_t grid_size(const std::vector<Axis>& axes) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.count();
    return total;
}

// iterate over every frequency tuple of the axes
template <class F>
void for_each_frequency(const std::vector<Axis>& axes, F&& f) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.frequency_count();
    std::vector<int> nu(axes.size());
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            nu[k] = axes[k].lowest_frequency() + static_cast<int>(rem % axes[k].frequency_count());
            rem /= axes[k].frequency_count();
        }
        f(nu);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

cplx kernel_w(int N, cplx x) {
    if (N < 0) throw std::invalid_argument("kernel_w: N must be non-negative");
    const cplx half = std::sin(x / 2.0);
    if (std::abs(half) < 1e-6) {
        // near the removable singularity sum the geometric series directly
        cplx s = 0;
        for (int nu = -N; nu <= N; ++nu) s += std::exp(I * double(nu) * x);
        return s / double(2 * N + 1);
    }
    return std::sin(double(2 * N + 1) * x / 2.0) / (double(2 * N + 1) * half);
}

cplx geometric_sum(int N, cplx q) {
    if (N < 0) throw std::invalid_argument("geometric_sum: N must be non-negative");
    cplx s = 0;
    for (int k = 0; k <= N; ++k) s = s * q + 1.0;
    return s;
}

double Axis::node(int j) const {
    if (j < 0 || j >= count()) throw std::out_of_range("Axis::node: index out of range");
    return 2 * pi * j / count();
}

std::size_t SampleGrid::size() const { return grid_size(axes); }

std::vector<int> SampleGrid::index(std::size_t flat) const {
    std::vector<int> idx(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) {
        idx[k] = static_cast<int>(flat % axes[k].count());
        flat /= axes[k].count();
    }
    return idx;
}

std::vector<double> SampleGrid::angles(std::size_t flat) const {
    auto idx = index(flat);
    std::vector<double> out(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) out[k] = axes[k].node(idx[k]);
    return out;
}

void validate(const SampleGrid& grid) {
    if (grid.axes.empty()) throw std::invalid_argument("sample grid: no axes");
    for (std::size_t k = 0; k < grid.axes.size(); ++k) {
        const auto& a = grid.axes[k];
        if (a.N < 0) throw std::invalid_argument("sample grid: axis " + std::to_string(k) + " has negative N");
        if (a.count() < a.exact_count())
            throw std::invalid_argument("sample grid: axis " + std::to_string(k) + " has too few nodes");
        if (a.oversampled() && !grid.least_squares)
            throw std::invalid_argument("sample grid: axis " + std::to_string(k) +
                                        " is oversampled; enable least-squares mode to accept it");
    }
    if (grid.values.size() != grid.size())
        throw std::invalid_argument("sample grid: expected " + std::to_string(grid.size()) + " samples, got " +
                                    std::to_string(grid.values.size()));
    if (!grid.sigma.empty() && grid.sigma.size() != grid.size())
        throw std::invalid_argument("sample grid: sigma length does not match the sample count");
}

Target target_from_angles(std::span<const cplx> angles) {
    Target t;
    for (auto a : angles) t.push_back(std::exp(I * a));
    return t;
}

std::vector<cplx> axis_weights(const Axis& axis, cplx u) {
    std::vector<cplx> w(axis.count());
    for (int j = 0; j < axis.count(); ++j) {
        const cplx q = u * std::exp(-I * axis.node(j));
        // sum_{nu} q^nu over the axis frequencies, divided by the node count
        cplx s = geometric_sum(axis.frequency_count() - 1, q);
        if (axis.kind == AxisKind::two_sided) s *= std::pow(q, -axis.N);
        w[j] = s / double(axis.count());
    }
    return w;
}

std::vector<cplx> fourier_coefficients(const SampleGrid& grid) {
    validate(grid);
    // transform one axis at a time; `work` holds the partially transformed tensor
    std::vector<cplx> work = grid.values;
    std::vector<std::size_t> dims;
    for (const auto& a : grid.axes) dims.push_back(a.count());
    for (std::size_t k = 0; k < grid.axes.size(); ++k) {
        const auto& a = grid.axes[k];
        std::size_t inner = 1, outer = 1;
        for (std::size_t q = 0; q < k; ++q) inner *= dims[q];
        for (std::size_t q = k + 1; q < dims.size(); ++q) outer *= dims[q];
        const std::size_t nf = a.frequency_count();
        std::vector<cplx> next(inner * nf * outer);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t f = 0; f < nf; ++f) {
                const int nu = a.lowest_frequency() + static_cast<int>(f);
                for (std::size_t i = 0; i < inner; ++i) {
                    CompensatedSum<cplx> acc;
                    for (int j = 0; j < a.count(); ++j)
                        acc.add(std::exp(-I * double(nu) * a.node(j)) * work[i + inner * (j + dims[k] * o)]);
                    next[i + inner * (f + nf * o)] = acc.value() / double(a.count());
                }
            }
        work.swap(next);
        dims[k] = nf;
    }
    return work;
}

cplx synthesize(std::span<const Axis> axes, std::span<const cplx> coefficients, const Target& target) {
    if (target.size() != axes.size()) throw std::invalid_argument("synthesize: target arity does not match the axes");
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.frequency_count();
    if (coefficients.size() != total) throw std::invalid_argument("synthesize: coefficient box has the wrong size");
    CompensatedSum<cplx> acc;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        cplx term = coefficients[flat];
        for (std::size_t k = 0; k < axes.size(); ++k) {
            const int nu = axes[k].lowest_frequency() + static_cast<int>(rem % axes[k].frequency_count());
            rem /= axes[k].frequency_count();
            term *= std::pow(target[k], nu);
        }
        acc.add(term);
    }
    return acc.value();
}

cplx continue_to(const SampleGrid& grid, const Target& target) {
    validate(grid);
    if (target.size() != grid.axes.size()) throw std::invalid_argument("continue_to: target arity does not match the grid");
    std::vector<std::vector<cplx>> w;
    for (std::size_t k = 0; k < grid.axes.size(); ++k) w.push_back(axis_weights(grid.axes[k], target[k]));
    CompensatedSum<cplx> acc;
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        std::size_t rem = flat;
        cplx x = grid.values[flat];
        for (std::size_t k = 0; k < grid.axes.size(); ++k) {
            x *= w[k][rem % grid.axes[k].count()];
            rem /= grid.axes[k].count();
        }
        acc.add(x);
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Wick targets
// ---------------------------------------------------------------------------

cplx wick_g(cplx theta) { return 0.5 * std::log(std::sin(2.0 * theta)) + I * (pi / 4) - 0.5 * std::log(2.0); }

WickTarget wick_targets(double beta, double vertical_coupling) {
    const double a = beta * vertical_coupling;
    if (a == 0.0) throw std::invalid_argument("wick_targets: beta * J = 0 is a branch point of the rotation angle");
    const double x = std::exp(-2 * a);
    const cplx u = std::sqrt(cplx((1 + x) / (1 - x)));
    WickTarget t;
    t.alpha = -I * beta;
    t.theta = -I * std::log(u);
    t.g = wick_g(t.theta);
    return t;
}

double apriori_error(int N, double beta, double sigma_max) {
    double total = 0;
    for (int j = 0; j <= 2 * N; ++j) total += std::abs(kernel_w(N, I * beta - 2 * pi * j / (2 * N + 1)));
    return total * sigma_max;
}

// ---------------------------------------------------------------------------
// ExponentialSeries
// ---------------------------------------------------------------------------

ExponentialSeries::ExponentialSeries(std::vector<double> exponents, std::vector<cplx> coefficients) {
    if (exponents.size() != coefficients.size())
        throw std::invalid_argument("ExponentialSeries: exponent and coefficient counts differ");
    std::map<double, cplx> merged;
    for (std::size_t k = 0; k < exponents.size(); ++k) merged[exponents[k]] += coefficients[k];
    for (const auto& [p, d] : merged) {
        p_.push_back(p);
        d_.push_back(d);
    }
}

namespace {

double shift_for(const std::vector<double>& p, double beta) {
    if (p.empty()) return 0;
    return std::max(p.front() * beta, p.back() * beta);
}

}  // namespace

cplx ExponentialSeries::value(double beta) const { return derivative(beta, 0); }

cplx ExponentialSeries::derivative(double beta, int order) const {
    const double shift = shift_for(p_, beta);
    CompensatedSum<cplx> acc;
    for (std::size_t k = 0; k < p_.size(); ++k) acc.add(d_[k] * std::pow(p_[k], order) * std::exp(p_[k] * beta - shift));
    return acc.value() * std::exp(shift);
}

cplx ExponentialSeries::log_ratio(double beta, int order) const {
    const double shift = shift_for(p_, beta);
    CompensatedSum<cplx> num, den;
    for (std::size_t k = 0; k < p_.size(); ++k) {
        const cplx t = d_[k] * std::exp(p_[k] * beta - shift);
        num.add(t * std::pow(p_[k], order));
        den.add(t);
    }
    return num.value() / den.value();
}

double ExponentialSeries::log_abs(double beta) const {
    const double shift = shift_for(p_, beta);
    CompensatedSum<cplx> acc;
    for (std::size_t k = 0; k < p_.size(); ++k) acc.add(d_[k] * std::exp(p_[k] * beta - shift));
    return std::log(std::abs(acc.value())) + shift;
}

Thermodynamics thermodynamics(const ExponentialSeries& z, double beta, int spins) {
    if (spins < 1) throw std::invalid_argument("thermodynamics: need at least one spin");
    const double n = spins;
    const double r1 = z.log_ratio(beta, 1).real();
    const double r2 = z.log_ratio(beta, 2).real();
    Thermodynamics t;
    t.log_z_per_beta = beta != 0 ? z.log_abs(beta) / (n * beta) : std::numeric_limits<double>::infinity();
    t.energy = -r1 / n;
    t.specific_heat = beta * beta * (r2 - r1 * r1) / n;
    return t;
}

// ---------------------------------------------------------------------------
// ReconstructionPlan
// ---------------------------------------------------------------------------

ReconstructionPlan::ReconstructionPlan(std::vector<Axis> axes, std::vector<double> exponents,
                                       std::vector<std::vector<cplx>> map)
    : axes_(std::move(axes)), samples_(grid_size(axes_)), exponents_(std::move(exponents)), map_(std::move(map)) {
    if (exponents_.size() != map_.size()) throw std::invalid_argument("ReconstructionPlan: map rows do not match exponents");
    for (const auto& row : map_)
        if (row.size() != samples_) throw std::invalid_argument("ReconstructionPlan: map row has the wrong length");
}

ExponentialSeries ReconstructionPlan::series(std::span<const cplx> samples) const {
    if (samples.size() != samples_)
        throw std::invalid_argument("reconstruction: expected " + std::to_string(samples_) + " samples, got " +
                                    std::to_string(samples.size()));
    std::vector<cplx> d(exponents_.size());
    for (std::size_t p = 0; p < exponents_.size(); ++p) {
        CompensatedSum<cplx> acc;
        for (std::size_t j = 0; j < samples_; ++j) acc.add(map_[p][j] * samples[j]);
        d[p] = acc.value();
    }
    return ExponentialSeries(exponents_, std::move(d));
}

std::vector<cplx> ReconstructionPlan::sample_weights(double beta) const {
    std::vector<cplx> w(samples_, cplx(0));
    for (std::size_t p = 0; p < exponents_.size(); ++p) {
        const double e = std::exp(exponents_[p] * beta);
        for (std::size_t j = 0; j < samples_; ++j) w[j] += map_[p][j] * e;
    }
    return w;
}

double ReconstructionPlan::sigma(double beta, std::span<const double> sample_sigma) const {
    if (sample_sigma.size() != samples_) throw std::invalid_argument("reconstruction: sigma length mismatch");
    const auto w = sample_weights(beta);
    double v = 0;
    for (std::size_t j = 0; j < samples_; ++j) v += std::norm(w[j]) * sample_sigma[j] * sample_sigma[j];
    return std::sqrt(v);
}

double ReconstructionPlan::apriori_error(double beta, std::span<const double> sample_sigma) const {
    if (sample_sigma.size() != samples_) throw std::invalid_argument("reconstruction: sigma length mismatch");
    const auto w = sample_weights(beta);
    double total = 0;
    for (std::size_t j = 0; j < samples_; ++j) total += std::abs(w[j]) * sample_sigma[j];
    return total;
}

std::vector<double> ReconstructionPlan::coefficient_sigma(std::span<const double> sample_sigma) const {
    if (sample_sigma.size() != samples_) throw std::invalid_argument("reconstruction: sigma length mismatch");
    std::vector<double> out;
    for (const auto& row : map_) {
        double v = 0;
        for (std::size_t j = 0; j < samples_; ++j) v += std::norm(row[j]) * sample_sigma[j] * sample_sigma[j];
        out.push_back(std::sqrt(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-step problem
// ---------------------------------------------------------------------------

int OneStepProblem::bandwidth() const { return integer_bandwidth({model.couplings}, {model.fields}, "one-step problem"); }

SampleGrid OneStepProblem::sample(unsigned threads) const {
    SampleGrid g;
    g.axes = {Axis::two_sided(bandwidth())};
    g.values.resize(g.size());
    const auto j = model.cast<cplx>();
    parallel_for(g.size(), threads, [&](std::size_t k) {
        CircuitProgram p{model.lattice, {DiagonalLayer{g.axes[0].node(static_cast<int>(k)), j.couplings, j.fields, {}}}};
        g.values[k] = amplitude(p);
    });
    return g;
}

ReconstructionPlan OneStepProblem::plan() const {
    const std::vector<Axis> axes{Axis::two_sided(bandwidth())};
    MapBuilder b(grid_size(axes));
    const double scale = std::pow(2.0, model.size());
    for_each_frequency(axes, [&](const std::vector<int>& nu) { b.add(nu[0], scale, fourier_row(axes, nu)); });
    return b.finish(axes);
}

ReconstructionPlan squared_one_step_plan(int sites, int bandwidth) {
    const std::vector<Axis> axes{Axis::two_sided(2 * bandwidth)};
    MapBuilder b(grid_size(axes));
    const double scale = std::pow(4.0, sites);
    for_each_frequency(axes, [&](const std::vector<int>& nu) { b.add(nu[0], scale, fourier_row(axes, nu)); });
    return b.finish(axes);
}

SampleGrid sample_squared_one_step(const OneStepProblem& problem) {
    SampleGrid g;
    g.axes = {Axis::two_sided(2 * problem.bandwidth())};
    const auto j = problem.model.cast<cplx>();
    for (int k = 0; k < g.axes[0].count(); ++k) {
        CircuitProgram p{problem.model.lattice, {DiagonalLayer{g.axes[0].node(k), j.couplings, j.fields, {}}}};
        g.values.push_back(std::norm(amplitude(p)));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Uniform layered problem
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<cplx>> to_complex(const std::vector<std::vector<double>>& v) {
    std::vector<std::vector<cplx>> out;
    for (const auto& r : v) out.emplace_back(r.begin(), r.end());
    return out;
}

void check_slices(const Lattice& slice, const std::vector<std::vector<double>>& couplings,
                  const std::vector<std::vector<double>>& fields, const char* who) {
    if (couplings.empty()) throw std::invalid_argument(std::string(who) + ": need at least one slice");
    if (fields.size() != couplings.size()) throw std::invalid_argument(std::string(who) + ": slice counts differ");
    for (std::size_t t = 0; t < couplings.size(); ++t) {
        if (couplings[t].size() != slice.edge_count())
            throw std::invalid_argument(std::string(who) + ": slice " + std::to_string(t) + " has the wrong coupling count");
        if (fields[t].size() != static_cast<std::size_t>(slice.size()))
            throw std::invalid_argument(std::string(who) + ": slice " + std::to_string(t) + " has the wrong field count");
    }
}

}  // namespace

int UniformLayeredProblem::alpha_bandwidth() const {
    check_slices(slice, couplings, fields, "uniform layered problem");
    return integer_bandwidth(couplings, fields, "uniform layered problem");
}

int UniformLayeredProblem::theta_bandwidth() const { return slice.size() * (slices() - 1); }

IsingModel UniformLayeredProblem::classical_model() const {
    check_slices(slice, couplings, fields, "uniform layered problem");
    const int n = slice.size(), m = slices();
    const auto st = stack_slices(slice, m);
    std::vector<double> j(st.lattice.edge_count()), h(static_cast<std::size_t>(n) * m);
    for (int t = 0; t < m; ++t) {
        for (std::size_t e = 0; e < slice.edge_count(); ++e) j[st.slice_edge[t][e]] = couplings[t][e];
        for (int i = 0; i < n; ++i) h[i + n * t] = fields[t][i];
    }
    for (const auto& gap : st.vertical_edge)
        for (auto e : gap) j[e] = vertical;
    return IsingModel(st.lattice, std::move(j), std::move(h));
}

LayeredSpec UniformLayeredProblem::program_at(cplx alpha, cplx theta) const {
    check_slices(slice, couplings, fields, "uniform layered problem");
    LayeredSpec s;
    s.lattice = slice;
    s.alpha.assign(slices(), alpha);
    s.couplings = to_complex(couplings);
    s.fields = to_complex(fields);
    s.angles.assign(slices() - 1, std::vector<cplx>(slice.size(), theta));
    return s;
}

SampleGrid UniformLayeredProblem::sample(unsigned threads) const {
    SampleGrid g;
    g.axes = {Axis::two_sided(alpha_bandwidth()), Axis::two_sided(theta_bandwidth())};
    g.values.resize(g.size());
    parallel_for(g.size(), threads, [&](std::size_t k) {
        const auto x = g.angles(k);
        g.values[k] = amplitude(layered_program(program_at(x[0], x[1])));
    });
    return g;
}

ReconstructionPlan UniformLayeredProblem::plan() const {
    const int S = theta_bandwidth();
    if (S > 0 && vertical == 0.0)
        throw std::invalid_argument("uniform layered problem: zero vertical coupling has no continuation");
    const std::vector<Axis> axes{Axis::two_sided(alpha_bandwidth()), Axis::two_sided(S)};
    MapBuilder b(grid_size(axes));
    const double scale = std::pow(2.0, slice.size());
    std::map<int, std::vector<double>> polys;
    for_each_frequency(axes, [&](const std::vector<int>& nu) {
        const int nu2 = nu[1];
        if (((S + nu2) % 2 + 2) % 2 != 0) return;  // absent by parity
        auto& poly = polys[nu2];
        if (poly.empty()) poly = binomial_product((S + nu2) / 2, (S - nu2) / 2);
        const auto row = fourier_row(axes, nu);
        for (std::size_t r = 0; r < poly.size(); ++r)
            if (poly[r] != 0) b.add(nu[0] + vertical * (S - 2.0 * r), scale * poly[r], row);
    });
    return b.finish(axes);
}

// ---------------------------------------------------------------------------
// Disordered problem
// ---------------------------------------------------------------------------

namespace {

void check_vertical(const DisorderedProblem& p) {
    check_slices(p.slice, p.couplings, p.fields, "disordered problem");
    if (p.vertical.size() != static_cast<std::size_t>(p.slices() - 1))
        throw std::invalid_argument("disordered problem: need one vertical row per gap between slices");
    for (const auto& row : p.vertical) {
        if (row.size() != static_cast<std::size_t>(p.slice.size()))
            throw std::invalid_argument("disordered problem: vertical row has the wrong length");
        for (int v : row)
            if (v != 1 && v != -1) throw std::invalid_argument("disordered problem: vertical couplings must be +1 or -1");
    }
}

}  // namespace

int DisorderedProblem::alpha_bandwidth() const {
    check_slices(slice, couplings, fields, "disordered problem");
    return integer_bandwidth(couplings, fields, "disordered problem");
}

int DisorderedProblem::ferro_count() const {
    check_vertical(*this);
    int c = 0;
    for (const auto& row : vertical) c += static_cast<int>(std::count(row.begin(), row.end(), 1));
    return c;
}

int DisorderedProblem::antiferro_count() const {
    check_vertical(*this);
    int c = 0;
    for (const auto& row : vertical) c += static_cast<int>(std::count(row.begin(), row.end(), -1));
    return c;
}

IsingModel DisorderedProblem::classical_model() const {
    check_vertical(*this);
    const int n = slice.size(), m = slices();
    const auto st = stack_slices(slice, m);
    std::vector<double> j(st.lattice.edge_count()), h(static_cast<std::size_t>(n) * m);
    for (int t = 0; t < m; ++t) {
        for (std::size_t e = 0; e < slice.edge_count(); ++e) j[st.slice_edge[t][e]] = couplings[t][e];
        for (int i = 0; i < n; ++i) h[i + n * t] = fields[t][i];
    }
    for (int t = 0; t + 1 < m; ++t)
        for (int i = 0; i < n; ++i) j[st.vertical_edge[t][i]] = vertical[t][i];
    return IsingModel(st.lattice, std::move(j), std::move(h));
}

CircuitProgram DisorderedProblem::program_at(cplx alpha, cplx theta_plus, cplx theta_minus) const {
    check_vertical(*this);
    CircuitProgram p{slice, {}};
    for (int t = 0; t < slices(); ++t) {
        std::vector<cplx> j(couplings[t].begin(), couplings[t].end()), h(fields[t].begin(), fields[t].end());
        p.layers.push_back(DiagonalLayer{alpha, j, h, {}});
        if (t + 1 < slices()) {
            std::vector<cplx> angles;
            for (int v : vertical[t]) angles.push_back(v == 1 ? theta_plus : theta_minus);
            p.layers.push_back(GLayer{angles});
        }
    }
    return p;
}

SampleGrid DisorderedProblem::sample(unsigned threads) const {
    SampleGrid g;
    g.axes = {Axis::two_sided(alpha_bandwidth()), Axis::one_sided(ferro_count()), Axis::one_sided(antiferro_count())};
    g.values.resize(g.size());
    parallel_for(g.size(), threads, [&](std::size_t k) {
        const auto x = g.angles(k);
        g.values[k] = amplitude(program_at(x[0], x[1], x[2]));
    });
    return g;
}

ReconstructionPlan DisorderedProblem::plan() const {
    const int np = ferro_count(), nm = antiferro_count(), n2 = np + nm;
    const std::vector<Axis> axes{Axis::two_sided(alpha_bandwidth()), Axis::one_sided(np), Axis::one_sided(nm)};
    MapBuilder b(grid_size(axes));
    const double scale = std::pow(2.0, slice.size());
    // (y + 1/y)^(n2 - k) (y - 1/y)^k = y^{-n2} (y^2 + 1)^(n2 - k) (y^2 - 1)^k, y = e^beta
    std::vector<std::vector<double>> polys(n2 + 1);
    for (int k = 0; k <= n2; ++k) {
        auto p = binomial_product(n2 - k, k);  // (1 + x)^(n2-k) (1 - x)^k in x = y^2
        const double sign = (k % 2) ? -1.0 : 1.0;  // (x - 1)^k = (-1)^k (1 - x)^k
        for (auto& c : p) c *= sign;
        polys[k] = std::move(p);
    }
    for_each_frequency(axes, [&](const std::vector<int>& nu) {
        const int k = nu[1] + nu[2];
        const double sign = (nu[2] % 2) ? -1.0 : 1.0;  // (-tanh)^{nu-}
        const auto row = fourier_row(axes, nu);
        for (std::size_t r = 0; r < polys[k].size(); ++r)
            if (polys[k][r] != 0) b.add(nu[0] + 2.0 * r - n2, scale * sign * polys[k][r], row);
    });
    return b.finish(axes);
}

// ---------------------------------------------------------------------------
// Grid models as layered problems
// ---------------------------------------------------------------------------

namespace {

struct Split {
    Lattice slice;
    std::vector<std::vector<double>> couplings, fields;
    std::vector<std::vector<double>> vertical;
};

Split split_grid(const IsingModel& model) {
    if (!model.lattice.is_grid()) throw std::invalid_argument("layered problem: model needs grid geometry");
    auto ext = model.lattice.shape()->extents;
    auto per = model.lattice.shape()->periodic;
    if (per.back() && ext.back() > 2) throw std::invalid_argument("layered problem: the time axis must be open");
    const int m = ext.back();
    ext.pop_back();
    per.pop_back();
    if (ext.empty()) {
        ext = {1};
        per = {false};
    }
    Split s;
    s.slice = Lattice::grid(ext, per);
    const int n = s.slice.size();
    const auto st = stack_slices(s.slice, m);
    std::map<std::pair<int, int>, double> bond;
    for (std::size_t e = 0; e < model.lattice.edge_count(); ++e) {
        const auto& ed = model.lattice.edges()[e];
        bond[{std::min(ed.a, ed.b), std::max(ed.a, ed.b)}] = model.couplings[e];
    }
    auto lookup = [&](std::size_t e) {
        const auto& ed = st.lattice.edges()[e];
        return bond.at({std::min(ed.a, ed.b), std::max(ed.a, ed.b)});
    };
    for (int t = 0; t < m; ++t) {
        std::vector<double> j, h;
        for (auto e : st.slice_edge[t]) j.push_back(lookup(e));
        for (int i = 0; i < n; ++i) h.push_back(model.fields[i + n * t]);
        s.couplings.push_back(j);
        s.fields.push_back(h);
    }
    for (const auto& gap : st.vertical_edge) {
        std::vector<double> v;
        for (auto e : gap) v.push_back(lookup(e));
        s.vertical.push_back(v);
    }
    return s;
}

}  // namespace

UniformLayeredProblem uniform_problem_from_grid(const IsingModel& model) {
    auto s = split_grid(model);
    double v = 1.0;
    bool first = true;
    for (const auto& row : s.vertical)
        for (double x : row) {
            if (first) v = x;
            else if (x != v) throw std::invalid_argument("layered problem: vertical couplings are not uniform");
            first = false;
        }
    return {s.slice, s.couplings, s.fields, v};
}

DisorderedProblem disordered_problem_from_grid(const IsingModel& model) {
    auto s = split_grid(model);
    DisorderedProblem p{s.slice, s.couplings, s.fields, {}};
    for (const auto& row : s.vertical) {
        std::vector<int> v;
        for (double x : row) {
            if (x != 1.0 && x != -1.0) throw std::invalid_argument("disordered problem: vertical couplings must be +1 or -1");
            v.push_back(static_cast<int>(x));
        }
        p.vertical.push_back(v);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Coefficients and noise
// ---------------------------------------------------------------------------

XiEstimate xi_with_errors(const ReconstructionPlan& plan, std::span<const cplx> samples,
                          std::span<const double> sample_sigma) {
    const auto series = plan.series(samples);
    const auto sig = plan.coefficient_sigma(sample_sigma);
    XiEstimate out;
    // exponents ascend, so energies k = -p come out descending; walk backwards
    for (std::size_t q = series.exponents().size(); q-- > 0;) {
        const double p = series.exponents()[q];
        if (!is_integer(p)) throw std::invalid_argument("xi_with_errors: plan has non-integer exponents");
        out.k.push_back(-static_cast<long long>(p));
        out.xi.push_back(series.coefficients()[q].real());
        // the plan merges equal exponents, so plan and series rows line up
        out.sigma.push_back(sig[q]);
    }
    // counts are integers: an estimate must clear both its noise and one half
    for (std::size_t q = 0; q < out.k.size(); ++q)
        if (out.xi[q] > std::max(out.sigma[q], 0.5)) {
            out.ground_bound = out.k[q];
            out.bound_found = true;
            break;
        }
    return out;
}

std::vector<cplx> add_noise(std::span<const cplx> samples, double sigma, std::uint64_t seed, std::uint64_t stream) {
    const CounterRng rng(seed, stream);
    std::vector<cplx> out(samples.begin(), samples.end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += sigma * cplx(rng.normal(2 * j), rng.normal(2 * j + 1));
    return out;
}

std::vector<NoiseStudyRow> noise_study(const ReconstructionPlan& plan, std::span<const cplx> exact_samples,
                                       const ExponentialSeries& truth, int spins, std::span<const double> betas,
                                       double sigma, int draws, std::uint64_t seed) {
    if (draws < 2) throw std::invalid_argument("noise_study: need at least two draws");
    const std::vector<double> sig(plan.sample_count(), sigma);
    std::vector<NoiseStudyRow> rows;
    for (double b : betas) {
        NoiseStudyRow r{};
        r.beta = b;
        r.truth = thermodynamics(truth, b, spins);
        r.z_true = truth.value(b).real();
        r.z_sigma = plan.sigma(b, sig);
        r.z_apriori = plan.apriori_error(b, sig);
        r.draws = draws;
        rows.push_back(r);
    }
    struct Acc {
        double s[4] = {0, 0, 0, 0}, ss[4] = {0, 0, 0, 0};
    };
    std::vector<Acc> acc(rows.size());
    for (int d = 0; d < draws; ++d) {
        const auto noisy = add_noise(exact_samples, sigma, seed, static_cast<std::uint64_t>(d));
        const auto z = plan.series(noisy);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto t = thermodynamics(z, rows[k].beta, spins);
            const cplx zv = z.value(rows[k].beta);
            const double v[4] = {t.log_z_per_beta, t.energy, t.specific_heat, zv.real()};
            for (int q = 0; q < 4; ++q) {
                acc[k].s[q] += v[q];
                acc[k].ss[q] += v[q] * v[q];
            }
            if (std::abs(zv - rows[k].z_true) <= rows[k].z_apriori) ++rows[k].covered;
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        double mean[4], se[4];
        for (int q = 0; q < 4; ++q) {
            mean[q] = acc[k].s[q] / draws;
            const double var = std::max(0.0, (acc[k].ss[q] - draws * mean[q] * mean[q]) / (draws - 1));
            se[q] = std::sqrt(var / draws);
        }
        rows[k].mean = {mean[0], mean[1], mean[2]};
        rows[k].standard_error = {se[0], se[1], se[2]};
        rows[k].z_mean = mean[3];
    }
    return rows;
}

}  // namespace ising_lab

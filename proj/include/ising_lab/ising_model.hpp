#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ising_lab/numeric.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

struct Edge {
    int a = 0;
    int b = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct GridShape {
    std::vector<int> extents;
    std::vector<bool> periodic;
};

class Lattice {
public:
    Lattice() = default;

    // Hypercubic grid. Site index runs with axis 0 fastest. Edges are listed
    // site by site, axis by axis, each to the +1 neighbour. Periodic axes of
    // extent <= 2 get no wrap bond (it would duplicate the open one).
    static Lattice grid(std::vector<int> extents, std::vector<bool> periodic = {});
    static Lattice chain(int length, bool periodic = false) { return grid({length}, {periodic}); }
    static Lattice irregular(int vertex_count, std::vector<Edge> edges);

    int size() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::optional<GridShape>& shape() const noexcept { return shape_; }
    bool is_grid() const noexcept { return shape_.has_value(); }

    int site(std::span<const int> coords) const;
    std::vector<int> coords(int site) const;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::optional<GridShape> shape_;
};

// m copies of a slice lattice stacked along a new time direction; site i of
// slice t becomes i + n t. Grid slices give a grid with one more (open) axis.
struct StackedLattice {
    Lattice lattice;
    std::vector<std::vector<std::size_t>> slice_edge;     // [t][slice edge] -> edge
    std::vector<std::vector<std::size_t>> vertical_edge;  // [t][site] -> edge between t and t+1
};

StackedLattice stack_slices(const Lattice& slice, int slices);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

// H(s) = - sum_i h_i s_i - sum_<ij> J_ij s_i s_j. The scalar type is double for
// physical models and complex for the continued models built by the circuit
// side; in "weight" form a model with couplings K and fields b stands for the
// configuration weight exp(sum K s s + sum b s) = exp(-H).
template <class T>
struct BasicIsingModel {
    Lattice lattice;
    std::vector<T> couplings;
    std::vector<T> fields;

    BasicIsingModel() = default;
    BasicIsingModel(Lattice l, std::vector<T> j, std::vector<T> h)
        : lattice(std::move(l)), couplings(std::move(j)), fields(std::move(h)) {
        if (couplings.size() != lattice.edge_count())
            throw std::invalid_argument("couplings: expected " + std::to_string(lattice.edge_count()) +
                                        " values, got " + std::to_string(couplings.size()));
        if (fields.size() != static_cast<std::size_t>(lattice.size()))
            throw std::invalid_argument("fields: expected " + std::to_string(lattice.size()) +
                                        " values, got " + std::to_string(fields.size()));
    }

    static BasicIsingModel uniform(Lattice l, T j, T h) {
        std::vector<T> jj(l.edge_count(), j);
        std::vector<T> hh(l.size(), h);
        return BasicIsingModel(std::move(l), std::move(jj), std::move(hh));
    }

    int size() const noexcept { return lattice.size(); }

    template <class U>
    BasicIsingModel<U> cast() const {
        return BasicIsingModel<U>(lattice, std::vector<U>(couplings.begin(), couplings.end()),
                                  std::vector<U>(fields.begin(), fields.end()));
    }

    BasicIsingModel scaled(const T& factor) const {
        BasicIsingModel out = *this;
        for (auto& j : out.couplings) j *= factor;
        for (auto& h : out.fields) h *= factor;
        return out;
    }
};

using IsingModel = BasicIsingModel<double>;
using ComplexIsingModel = BasicIsingModel<cplx>;

// ---------------------------------------------------------------------------
// Spin configurations
// ---------------------------------------------------------------------------

// Bit i clear means s_i = +1, bit i set means s_i = -1.
class SpinConfiguration {
public:
    explicit SpinConfiguration(int length, std::uint64_t bits = 0);
    static SpinConfiguration from_spins(std::span<const int> spins);

    int length() const noexcept { return length_; }
    std::uint64_t bits() const noexcept { return bits_; }
    int spin(int i) const;
    void set(int i, int s);
    std::vector<int> spins() const;

private:
    int length_;
    std::uint64_t bits_;
};

inline int spin_of(std::uint64_t bits, int i) noexcept { return (bits >> i) & 1u ? -1 : 1; }

template <class T>
T energy(const BasicIsingModel<T>& model, const SpinConfiguration& config) {
    if (config.length() != model.size())
        throw std::invalid_argument("energy: configuration length " + std::to_string(config.length()) +
                                    " does not match model size " + std::to_string(model.size()));
    T e{};
    const auto& edges = model.lattice.edges();
    for (std::size_t k = 0; k < edges.size(); ++k)
        e -= model.couplings[k] * T(config.spin(edges[k].a) * config.spin(edges[k].b));
    for (int i = 0; i < model.size(); ++i) e -= model.fields[i] * T(config.spin(i));
    return e;
}

// ---------------------------------------------------------------------------
// Partition functions
// ---------------------------------------------------------------------------

struct EnumerationOptions {
    int max_sites = 26;
    unsigned threads = 1;
};

enum class Method { enumerate, transfer };

class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

// sum over configurations of exp(-H) for a model in weight form
cplx boltzmann_sum(const ComplexIsingModel& model, const EnumerationOptions& opts = {});

// Z(beta) = sum exp(-beta H)
cplx partition_function(const IsingModel& model, cplx beta, Method method = Method::enumerate,
                        const EnumerationOptions& opts = {});

// energy histogram: xi[E] = number of configurations with H = E (integer models only)
std::map<long long, std::uint64_t> xi_coefficients(const IsingModel& model,
                                                   const EnumerationOptions& opts = {});

struct ThermalAverages {
    double log_z = 0;
    double energy = 0;         // <H>
    double specific_heat = 0;  // beta^2 (<H^2> - <H>^2)
};

ThermalAverages thermal_averages(const IsingModel& model, double beta,
                                 const EnumerationOptions& opts = {});

// ---------------------------------------------------------------------------
// Pinning and conditional magnetization
// ---------------------------------------------------------------------------

using PinnedSet = std::map<int, int>;  // site -> +1 / -1

struct ReducedModel {
    IsingModel model;
    std::vector<int> original_site;  // reduced index -> original index
    double constant_energy = 0;      // energy of pinned-only terms
};

// Deletes pinned sites and folds J * s_pinned into the neighbours' fields.
ReducedModel reduce_pinned(const IsingModel& model, const PinnedSet& pinned);

double corner_magnetization(const IsingModel& model, double beta, const PinnedSet& pinned, int site,
                            const EnumerationOptions& opts = {});

// ---------------------------------------------------------------------------
// Transfer matrix
// ---------------------------------------------------------------------------

struct TransferOptions {
    int max_width = 20;        // open long axis
    int max_matrix_width = 10; // periodic long axis needs the full matrix
};

namespace detail {

struct RowLayout {
    int width = 0;
    int rows = 0;
    std::vector<int> col, row;  // per site
};

RowLayout row_layout(const Lattice& lattice);

}  // namespace detail

// sum over configurations of exp(sum K s s + sum b s), contracted row by row
// along the longest axis of a grid. Scalar may be double, complex or a
// multiprecision real.
template <class T>
T transfer_boltzmann_sum(const BasicIsingModel<T>& model, const TransferOptions& opts = {}) {
    using std::exp;
    if (model.size() == 0) return T(1);
    const auto lay = detail::row_layout(model.lattice);
    const int w = lay.width, rows = lay.rows;
    const std::size_t states = std::size_t{1} << w;

    struct Intra { int a, b; T k; };
    std::vector<std::vector<Intra>> intra(rows);
    std::vector<std::vector<T>> vertical(rows, std::vector<T>(w, T(0)));  // row r -> r+1
    std::vector<T> wrap_bond(w, T(0));                                     // last row -> row 0
    bool has_wrap = false;
    const auto& edges = model.lattice.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        int a = edges[e].a, b = edges[e].b;
        int ra = lay.row[a], rb = lay.row[b], ca = lay.col[a], cb = lay.col[b];
        if (ra == rb) {
            intra[ra].push_back({ca, cb, model.couplings[e]});
        } else if (ca == cb && std::abs(ra - rb) == 1) {
            vertical[std::min(ra, rb)][ca] += model.couplings[e];
        } else if (ca == cb && std::min(ra, rb) == 0 && std::max(ra, rb) == rows - 1) {
            wrap_bond[ca] += model.couplings[e];
            has_wrap = true;
        } else {
            throw std::invalid_argument("transfer: edge does not fit the row layout");
        }
    }
    if (has_wrap && w > opts.max_matrix_width)
        throw CapExceeded("transfer: periodic long axis needs width <= " +
                          std::to_string(opts.max_matrix_width));
    if (w > opts.max_width)
        throw CapExceeded("transfer: short axis " + std::to_string(w) + " exceeds cap " +
                          std::to_string(opts.max_width));

    // per-row diagonal weights
    std::vector<std::vector<T>> diag(rows, std::vector<T>(states));
    std::vector<int> site_at(static_cast<std::size_t>(w) * rows);
    for (int i = 0; i < model.size(); ++i) site_at[lay.row[i] * w + lay.col[i]] = i;
    for (int r = 0; r < rows; ++r)
        for (std::size_t s = 0; s < states; ++s) {
            T x(0);
            for (int c = 0; c < w; ++c) x += model.fields[site_at[r * w + c]] * T(spin_of(s, c));
            for (const auto& in : intra[r]) x += in.k * T(spin_of(s, in.a) * spin_of(s, in.b));
            diag[r][s] = exp(x);
        }

    auto propagate = [&](std::vector<T>& v, int r) {  // apply bonds r -> r+1, then row r+1
        for (int c = 0; c < w; ++c) {
            const T& k = vertical[r][c];
            if (k == T(0)) {
                // uncoupled column: the new bit is free, weight 1 for each value
                for (std::size_t s = 0; s < states; ++s)
                    if (!((s >> c) & 1u)) {
                        T sum = v[s] + v[s | (std::size_t{1} << c)];
                        v[s] = sum;
                        v[s | (std::size_t{1} << c)] = sum;
                    }
                continue;
            }
            T ep = exp(k), em = exp(-k);
            for (std::size_t s = 0; s < states; ++s)
                if (!((s >> c) & 1u)) {
                    std::size_t t = s | (std::size_t{1} << c);
                    T a = v[s], b = v[t];
                    v[s] = ep * a + em * b;
                    v[t] = em * a + ep * b;
                }
        }
        for (std::size_t s = 0; s < states; ++s) v[s] *= diag[r + 1][s];
    };

    if (!has_wrap) {
        std::vector<T> v = diag[0];
        for (int r = 0; r + 1 < rows; ++r) propagate(v, r);
        T total(0);
        for (const auto& x : v) total += x;
        return total;
    }
    T total(0);
    for (std::size_t s0 = 0; s0 < states; ++s0) {
        std::vector<T> v(states, T(0));
        v[s0] = diag[0][s0];
        for (int r = 0; r + 1 < rows; ++r) propagate(v, r);
        for (std::size_t s = 0; s < states; ++s) {
            T x(0);
            for (int c = 0; c < w; ++c) x += wrap_bond[c] * T(spin_of(s, c) * spin_of(s0, c));
            total += v[s] * exp(x);
        }
    }
    return total;
}

}  // namespace ising_lab

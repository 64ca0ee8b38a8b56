#include "ising_lab/ising_model.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

namespace ising_lab {

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

Lattice Lattice::grid(std::vector<int> extents, std::vector<bool> periodic) {
    if (extents.empty()) throw std::invalid_argument("grid: need at least one axis");
    if (periodic.empty()) periodic.assign(extents.size(), false);
    if (periodic.size() != extents.size())
        throw std::invalid_argument("grid: periodic flags must match the number of axes");
    long long total = 1;
    for (int e : extents) {
        if (e < 1) throw std::invalid_argument("grid: extents must be positive");
        total *= e;
        if (total > (1LL << 30)) throw std::invalid_argument("grid: too many sites");
    }
    Lattice l;
    l.n_ = static_cast<int>(total);
    l.shape_ = GridShape{extents, periodic};
    std::vector<int> c(extents.size());
    for (int s = 0; s < l.n_; ++s) {
        int rem = s;
        for (std::size_t ax = 0; ax < extents.size(); ++ax) {
            c[ax] = rem % extents[ax];
            rem /= extents[ax];
        }
        int stride = 1;
        for (std::size_t ax = 0; ax < extents.size(); ++ax) {
            if (c[ax] + 1 < extents[ax])
                l.edges_.push_back({s, s + stride});
            else if (periodic[ax] && extents[ax] > 2)
                l.edges_.push_back({s, s - c[ax] * stride});
            stride *= extents[ax];
        }
    }
    return l;
}

Lattice Lattice::irregular(int vertex_count, std::vector<Edge> edges) {
    if (vertex_count < 0) throw std::invalid_argument("irregular: negative vertex count");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.a < 0 || e.b < 0 || e.a >= vertex_count || e.b >= vertex_count)
            throw std::invalid_argument("irregular: edge endpoint out of range");
        if (e.a == e.b) throw std::invalid_argument("irregular: self-loop at vertex " + std::to_string(e.a));
        if (!seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second)
            throw std::invalid_argument("irregular: duplicate edge " + std::to_string(e.a) + "-" +
                                        std::to_string(e.b));
    }
    Lattice l;
    l.n_ = vertex_count;
    l.edges_ = std::move(edges);
    return l;
}

int Lattice::site(std::span<const int> coords) const {
    if (!shape_) throw std::invalid_argument("site: lattice has no grid geometry");
    const auto& ext = shape_->extents;
    if (coords.size() != ext.size()) throw std::invalid_argument("site: wrong number of coordinates");
    int s = 0, stride = 1;
    for (std::size_t ax = 0; ax < ext.size(); ++ax) {
        if (coords[ax] < 0 || coords[ax] >= ext[ax]) throw std::out_of_range("site: coordinate out of range");
        s += coords[ax] * stride;
        stride *= ext[ax];
    }
    return s;
}

std::vector<int> Lattice::coords(int site) const {
    if (!shape_) throw std::invalid_argument("coords: lattice has no grid geometry");
    if (site < 0 || site >= n_) throw std::out_of_range("coords: site out of range");
    std::vector<int> c;
    for (int e : shape_->extents) {
        c.push_back(site % e);
        site /= e;
    }
    return c;
}

StackedLattice stack_slices(const Lattice& slice, int slices) {
    if (slices < 1) throw std::invalid_argument("stack_slices: need at least one slice");
    const int n = slice.size();
    StackedLattice st;
    std::vector<std::pair<int, int>> wanted;  // edge list in slice-major order
    for (int t = 0; t < slices; ++t)
        for (const auto& e : slice.edges()) wanted.push_back({e.a + n * t, e.b + n * t});
    for (int t = 0; t + 1 < slices; ++t)
        for (int i = 0; i < n; ++i) wanted.push_back({i + n * t, i + n * (t + 1)});

    std::vector<std::size_t> position(wanted.size());
    bool placed = false;
    if (slice.is_grid()) {
        auto ext = slice.shape()->extents;
        auto per = slice.shape()->periodic;
        ext.push_back(slices);
        per.push_back(false);
        Lattice big = Lattice::grid(ext, per);
        if (big.edge_count() == wanted.size()) {
            std::map<std::pair<int, int>, std::size_t> where;
            for (std::size_t e = 0; e < big.edge_count(); ++e) {
                const auto& ed = big.edges()[e];
                where[{std::min(ed.a, ed.b), std::max(ed.a, ed.b)}] = e;
            }
            placed = true;
            for (std::size_t k = 0; k < wanted.size() && placed; ++k) {
                auto it = where.find({std::min(wanted[k].first, wanted[k].second),
                                      std::max(wanted[k].first, wanted[k].second)});
                if (it == where.end())
                    placed = false;
                else
                    position[k] = it->second;
            }
            if (placed) st.lattice = std::move(big);
        }
    }
    if (!placed) {
        std::vector<Edge> edges;
        for (std::size_t k = 0; k < wanted.size(); ++k) {
            edges.push_back({wanted[k].first, wanted[k].second});
            position[k] = k;
        }
        st.lattice = Lattice::irregular(n * slices, std::move(edges));
    }
    std::size_t k = 0;
    st.slice_edge.resize(slices);
    for (int t = 0; t < slices; ++t)
        for (std::size_t e = 0; e < slice.edge_count(); ++e) st.slice_edge[t].push_back(position[k++]);
    st.vertical_edge.resize(slices > 1 ? slices - 1 : 0);
    for (int t = 0; t + 1 < slices; ++t)
        for (int i = 0; i < n; ++i) st.vertical_edge[t].push_back(position[k++]);
    return st;
}

// ---------------------------------------------------------------------------
// SpinConfiguration
// ---------------------------------------------------------------------------

SpinConfiguration::SpinConfiguration(int length, std::uint64_t bits) : length_(length), bits_(bits) {
    if (length < 0 || length > 64) throw std::invalid_argument("SpinConfiguration: length must be in [0, 64]");
    if (length < 64 && (bits >> length) != 0)
        throw std::invalid_argument("SpinConfiguration: bits set beyond length");
}

SpinConfiguration SpinConfiguration::from_spins(std::span<const int> spins) {
    SpinConfiguration c(static_cast<int>(spins.size()));
    for (std::size_t i = 0; i < spins.size(); ++i) c.set(static_cast<int>(i), spins[i]);
    return c;
}

int SpinConfiguration::spin(int i) const {
    if (i < 0 || i >= length_) throw std::out_of_range("spin index out of range");
    return spin_of(bits_, i);
}

void SpinConfiguration::set(int i, int s) {
    if (i < 0 || i >= length_) throw std::out_of_range("spin index out of range");
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1");
    if (s == 1)
        bits_ &= ~(std::uint64_t{1} << i);
    else
        bits_ |= std::uint64_t{1} << i;
}

std::vector<int> SpinConfiguration::spins() const {
    std::vector<int> out(length_);
    for (int i = 0; i < length_; ++i) out[i] = spin_of(bits_, i);
    return out;
}

// ---------------------------------------------------------------------------
// Gray-code enumeration
// ---------------------------------------------------------------------------

namespace {

constexpr int kChunkBits = 14;

template <class T>
struct Adjacency {
    std::vector<std::size_t> start;  // CSR offsets
    std::vector<int> nbr;
    std::vector<T> k;

    explicit Adjacency(const BasicIsingModel<T>& m) {
        const int n = m.size();
        std::vector<std::vector<std::pair<int, T>>> lists(n);
        const auto& edges = m.lattice.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            lists[edges[e].a].push_back({edges[e].b, m.couplings[e]});
            lists[edges[e].b].push_back({edges[e].a, m.couplings[e]});
        }
        start.push_back(0);
        for (const auto& l : lists) {
            for (const auto& [j, kk] : l) {
                nbr.push_back(j);
                k.push_back(kk);
            }
            start.push_back(nbr.size());
        }
    }
};

// Calls visit(bits, exponent) for every configuration of the chunk, where
// exponent = sum K s s + sum b s. The low bits run through a Gray code with
// incremental updates; the exponent is recomputed from scratch per chunk so
// rounding drift stays local.
template <class T, class Visit>
void enumerate_chunk(const BasicIsingModel<T>& m, const Adjacency<T>& adj, int low_bits,
                     std::uint64_t chunk, Visit&& visit) {
    std::uint64_t bits = chunk << low_bits;
    T x{};
    const auto& edges = m.lattice.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        x += m.couplings[e] * T(spin_of(bits, edges[e].a) * spin_of(bits, edges[e].b));
    for (int i = 0; i < m.size(); ++i) x += m.fields[i] * T(spin_of(bits, i));
    visit(bits, x);
    const std::uint64_t count = std::uint64_t{1} << low_bits;
    for (std::uint64_t g = 1; g < count; ++g) {
        const int site = std::countr_zero(g);
        const int s = spin_of(bits, site);
        T local = m.fields[site];
        for (std::size_t p = adj.start[site]; p < adj.start[site + 1]; ++p)
            local += adj.k[p] * T(spin_of(bits, adj.nbr[p]));
        x -= T(2 * s) * local;
        bits ^= std::uint64_t{1} << site;
        visit(bits, x);
    }
}

template <class T>
void check_cap(const BasicIsingModel<T>& m, const EnumerationOptions& opts) {
    if (m.size() > opts.max_sites || m.size() > 62)
        throw CapExceeded("enumeration: " + std::to_string(m.size()) + " sites exceeds cap " +
                          std::to_string(opts.max_sites));
}

struct ChunkPlan {
    int low_bits;
    std::size_t chunks;
};

ChunkPlan plan_chunks(int n) {
    int low = std::min(n, kChunkBits);
    return {low, std::size_t{1} << (n - low)};
}

// maximum of the real part of the exponent over all configurations
double max_real_exponent(const ComplexIsingModel& m, const Adjacency<cplx>& adj, const ChunkPlan& plan,
                         unsigned threads) {
    std::vector<double> best(plan.chunks, -std::numeric_limits<double>::infinity());
    parallel_for(plan.chunks, threads, [&](std::size_t c) {
        double b = -std::numeric_limits<double>::infinity();
        enumerate_chunk(m, adj, plan.low_bits, c, [&](std::uint64_t, const cplx& x) { b = std::max(b, x.real()); });
        best[c] = b;
    });
    return *std::max_element(best.begin(), best.end());
}

}  // namespace

cplx boltzmann_sum(const ComplexIsingModel& model, const EnumerationOptions& opts) {
    check_cap(model, opts);
    if (model.size() == 0) return 1.0;
    const Adjacency<cplx> adj(model);
    const auto plan = plan_chunks(model.size());
    const double shift = max_real_exponent(model, adj, plan, opts.threads);
    std::vector<cplx> parts(plan.chunks);
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        CompensatedSum<cplx> acc;
        enumerate_chunk(model, adj, plan.low_bits, c,
                        [&](std::uint64_t, const cplx& x) { acc.add(std::exp(x - shift)); });
        parts[c] = acc.value();
    });
    return tree_sum(std::move(parts)) * std::exp(shift);
}

cplx partition_function(const IsingModel& model, cplx beta, Method method, const EnumerationOptions& opts) {
    const auto weights = model.cast<cplx>().scaled(beta);
    if (method == Method::transfer) {
        if (!model.lattice.is_grid())
            throw std::invalid_argument("partition_function: transfer method needs a grid lattice");
        return transfer_boltzmann_sum(weights);
    }
    return boltzmann_sum(weights, opts);
}

namespace {

bool is_integer(double x) { return std::isfinite(x) && x == std::round(x); }

}  // namespace

std::map<long long, std::uint64_t> xi_coefficients(const IsingModel& model, const EnumerationOptions& opts) {
    check_cap(model, opts);
    long long bound = 0;
    for (double j : model.couplings) {
        if (!is_integer(j)) throw std::invalid_argument("xi_coefficients: non-integer coupling");
        bound += static_cast<long long>(std::llabs(static_cast<long long>(j)));
    }
    for (double h : model.fields) {
        if (!is_integer(h)) throw std::invalid_argument("xi_coefficients: non-integer field");
        bound += static_cast<long long>(std::llabs(static_cast<long long>(h)));
    }
    std::map<long long, std::uint64_t> out;
    if (model.size() == 0) {
        out[0] = 1;
        return out;
    }
    const Adjacency<double> adj(model);
    const auto plan = plan_chunks(model.size());
    const std::size_t width = static_cast<std::size_t>(2 * bound + 1);
    std::vector<std::vector<std::uint64_t>> parts(plan.chunks);
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        std::vector<std::uint64_t> hist(width, 0);
        enumerate_chunk(model, adj, plan.low_bits, c, [&](std::uint64_t, double x) {
            // x = -H, exact for integer models
            ++hist[static_cast<std::size_t>(bound - std::llround(x))];
        });
        parts[c] = std::move(hist);
    });
    std::vector<std::uint64_t> total(width, 0);
    for (const auto& p : parts)
        for (std::size_t i = 0; i < width; ++i) total[i] += p[i];
    for (std::size_t i = 0; i < width; ++i)
        if (total[i]) out[static_cast<long long>(i) - bound] = total[i];
    return out;
}

ThermalAverages thermal_averages(const IsingModel& model, double beta, const EnumerationOptions& opts) {
    check_cap(model, opts);
    ThermalAverages t;
    if (model.size() == 0) return t;
    const Adjacency<double> adj(model);
    const auto plan = plan_chunks(model.size());
    std::vector<double> best(plan.chunks, -std::numeric_limits<double>::infinity());
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        double b = -std::numeric_limits<double>::infinity();
        enumerate_chunk(model, adj, plan.low_bits, c, [&](std::uint64_t, double x) { b = std::max(b, beta * x); });
        best[c] = b;
    });
    const double shift = *std::max_element(best.begin(), best.end());
    struct Moments {
        double w = 0, e = 0, e2 = 0;
        Moments operator+(const Moments& o) const { return {w + o.w, e + o.e, e2 + o.e2}; }
    };
    std::vector<Moments> parts(plan.chunks);
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        CompensatedSum<double> w, e, e2;
        enumerate_chunk(model, adj, plan.low_bits, c, [&](std::uint64_t, double x) {
            double wt = std::exp(beta * x - shift);
            w.add(wt);
            e.add(-x * wt);
            e2.add(x * x * wt);
        });
        parts[c] = {w.value(), e.value(), e2.value()};
    });
    const Moments m = tree_sum(std::move(parts));
    t.log_z = std::log(m.w) + shift;
    t.energy = m.e / m.w;
    t.specific_heat = beta * beta * (m.e2 / m.w - t.energy * t.energy);
    return t;
}

// ---------------------------------------------------------------------------
// Pinning
// ---------------------------------------------------------------------------

ReducedModel reduce_pinned(const IsingModel& model, const PinnedSet& pinned) {
    const int n = model.size();
    for (const auto& [site, s] : pinned) {
        if (site < 0 || site >= n) throw std::out_of_range("pinned site " + std::to_string(site) + " out of range");
        if (s != 1 && s != -1) throw std::invalid_argument("pinned value must be +1 or -1");
    }
    ReducedModel r;
    std::vector<int> new_index(n, -1);
    for (int i = 0; i < n; ++i)
        if (!pinned.count(i)) {
            new_index[i] = static_cast<int>(r.original_site.size());
            r.original_site.push_back(i);
        }
    std::vector<double> fields;
    for (int i : r.original_site) fields.push_back(model.fields[i]);
    for (const auto& [site, s] : pinned) r.constant_energy -= model.fields[site] * s;
    std::vector<Edge> edges;
    std::vector<double> couplings;
    const auto& all = model.lattice.edges();
    for (std::size_t e = 0; e < all.size(); ++e) {
        int a = all[e].a, b = all[e].b;
        double j = model.couplings[e];
        bool pa = pinned.count(a), pb = pinned.count(b);
        if (!pa && !pb) {
            edges.push_back({new_index[a], new_index[b]});
            couplings.push_back(j);
        } else if (pa && pb) {
            r.constant_energy -= j * pinned.at(a) * pinned.at(b);
        } else if (pa) {
            fields[new_index[b]] += j * pinned.at(a);
        } else {
            fields[new_index[a]] += j * pinned.at(b);
        }
    }
    const int m = static_cast<int>(r.original_site.size());
    r.model = IsingModel(Lattice::irregular(m, std::move(edges)), std::move(couplings), std::move(fields));
    return r;
}

double corner_magnetization(const IsingModel& model, double beta, const PinnedSet& pinned, int site,
                            const EnumerationOptions& opts) {
    if (site < 0 || site >= model.size()) throw std::out_of_range("corner_magnetization: site out of range");
    if (pinned.count(site)) throw std::invalid_argument("corner_magnetization: site " + std::to_string(site) + " is pinned");
    const auto r = reduce_pinned(model, pinned);
    check_cap(r.model, opts);
    const int target = static_cast<int>(std::find(r.original_site.begin(), r.original_site.end(), site) -
                                        r.original_site.begin());
    const Adjacency<double> adj(r.model);
    const auto plan = plan_chunks(r.model.size());
    std::vector<double> best(plan.chunks, -std::numeric_limits<double>::infinity());
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        double b = -std::numeric_limits<double>::infinity();
        enumerate_chunk(r.model, adj, plan.low_bits, c, [&](std::uint64_t, double x) { b = std::max(b, beta * x); });
        best[c] = b;
    });
    const double shift = *std::max_element(best.begin(), best.end());
    struct Pair {
        double w = 0, ws = 0;
        Pair operator+(const Pair& o) const { return {w + o.w, ws + o.ws}; }
    };
    std::vector<Pair> parts(plan.chunks);
    parallel_for(plan.chunks, opts.threads, [&](std::size_t c) {
        CompensatedSum<double> w, ws;
        enumerate_chunk(r.model, adj, plan.low_bits, c, [&](std::uint64_t bits, double x) {
            double wt = std::exp(beta * x - shift);
            w.add(wt);
            ws.add(spin_of(bits, target) * wt);
        });
        parts[c] = {w.value(), ws.value()};
    });
    const Pair p = tree_sum(std::move(parts));
    return std::clamp(p.ws / p.w, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Transfer matrix layout
// ---------------------------------------------------------------------------

namespace detail {

// Rows run along the longest axis (the later one on ties); a row holds every
// site sharing that coordinate, flattened with the remaining axes in order.
RowLayout row_layout(const Lattice& lattice) {
    if (!lattice.is_grid()) throw std::invalid_argument("transfer: lattice has no grid geometry");
    const auto& ext = lattice.shape()->extents;
    std::size_t axis = 0;
    for (std::size_t ax = 1; ax < ext.size(); ++ax)
        if (ext[ax] >= ext[axis]) axis = ax;
    RowLayout lay;
    const int n = lattice.size();
    lay.rows = ext[axis];
    lay.width = n / lay.rows;
    lay.col.resize(n);
    lay.row.resize(n);
    for (int s = 0; s < n; ++s) {
        int rem = s, col = 0, stride = 1;
        for (std::size_t ax = 0; ax < ext.size(); ++ax) {
            const int c = rem % ext[ax];
            rem /= ext[ax];
            if (ax == axis) {
                lay.row[s] = c;
            } else {
                col += c * stride;
                stride *= ext[ax];
            }
        }
        lay.col[s] = col;
    }
    return lay;
}

}  // namespace detail

}  // namespace ising_lab

#pragma once

// Naive reference implementations used only by the tests.

#include <complex>
#include <cstdint>
#include <random>

#include "ising_lab/ising_model.hpp"

namespace oracle {

using ising_lab::cplx;

// sum over all configurations of exp(-beta * H), evaluated term by term
inline cplx brute_z(const ising_lab::IsingModel& m, cplx beta) {
    cplx z = 0;
    const int n = m.size();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
        double e = 0;
        for (std::size_t k = 0; k < m.lattice.edge_count(); ++k)
            e -= m.couplings[k] * ising_lab::spin_of(b, m.lattice.edges()[k].a) *
                 ising_lab::spin_of(b, m.lattice.edges()[k].b);
        for (int i = 0; i < n; ++i) e -= m.fields[i] * ising_lab::spin_of(b, i);
        z += std::exp(-beta * e);
    }
    return z;
}

inline cplx brute_weight_sum(const ising_lab::ComplexIsingModel& m) {
    cplx z = 0;
    const int n = m.size();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
        cplx x = 0;
        for (std::size_t k = 0; k < m.lattice.edge_count(); ++k)
            x += m.couplings[k] * double(ising_lab::spin_of(b, m.lattice.edges()[k].a) *
                                         ising_lab::spin_of(b, m.lattice.edges()[k].b));
        for (int i = 0; i < n; ++i) x += m.fields[i] * double(ising_lab::spin_of(b, i));
        z += std::exp(x);
    }
    return z;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline ising_lab::IsingModel random_model(ising_lab::Lattice l, std::mt19937_64& rng, bool integer = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> ui(-2, 2);
    std::vector<double> j(l.edge_count()), h(l.size());
    for (auto& x : j) x = integer ? ui(rng) : u(rng);
    for (auto& x : h) x = integer ? ui(rng) : u(rng);
    return {std::move(l), std::move(j), std::move(h)};
}

}  // namespace oracle

#include "ising_lab/circuit.hpp"

namespace oracle {

// random real-parameter layered program on the given slice lattice
inline ising_lab::LayeredSpec random_layered(ising_lab::Lattice l, int slices, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), ang(0.15, 1.4);
    ising_lab::LayeredSpec s;
    const int n = l.size();
    const std::size_t e = l.edge_count();
    s.lattice = std::move(l);
    for (int t = 0; t < slices; ++t) {
        s.alpha.push_back(u(rng) * 2.0);
        std::vector<cplx> j(e), h(n), k(n);
        for (auto& x : j) x = u(rng);
        for (auto& x : h) x = u(rng);
        for (auto& x : k) x = u(rng);
        s.couplings.push_back(j);
        s.fields.push_back(h);
        s.offsets.push_back(k);
        if (t + 1 < slices) {
            std::vector<cplx> a(n);
            for (auto& x : a) x = ang(rng);
            s.angles.push_back(a);
        }
    }
    return s;
}

}  // namespace oracle

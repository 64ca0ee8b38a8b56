#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ising_lab/bqp.hpp"
#include "ising_lab/circuit.hpp"
#include "ising_lab/ising_model.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Quantum transverse Ising model and adiabatic preparation
// ---------------------------------------------------------------------------

// H(s) = H0 + s H1 with H0 = -h_perp sum X, H1 = -J sum ZZ - h sum Z, s = t/T.
struct QuantumIsingParams {
    Lattice lattice;
    double h_perp = 1.0;
    double J = 1.0;
    double h = 0.0;

    void validate() const;
    int sites() const noexcept { return lattice.size(); }
    // |h| |Lambda| + |J| |E|, the norm scale of H1
    double diagonal_scale() const;
};

// dense H(s), row-major, 2^n x 2^n; basis index bit q set means Z_q = -1
std::vector<double> hamiltonian_matrix(const QuantumIsingParams& p, double s);
double spectral_gap(const QuantumIsingParams& p, double s);
// minimum over s in [0, 1] of the gap, scanned on a grid then refined
double minimum_gap(const QuantumIsingParams& p, int grid = 201);
// ground state of H(1) with a positive overlap on |+_x>
std::vector<cplx> ground_state(const QuantumIsingParams& p);

struct AdiabaticPlan {
    double T = 0;      // total time
    int L = 1;         // steps
    double tau = 0;    // T / L
    double gamma = 0;  // minimum gap
    double delta = 0;  // adiabatic target distance
    double K = 1.0;    // commutator constant of the splitting bound
    double deviation = 0;

    void validate() const;
};

double adiabatic_time(const QuantumIsingParams& p, double delta, double gamma);
double plan_deviation(const QuantumIsingParams& p, double T, int L, double delta, double K);
AdiabaticPlan adiabatic_plan(const QuantumIsingParams& p, double delta, double gamma, int L, double K = 1.0);
// explicit time, for evolutions shorter than the adiabatic bound
AdiabaticPlan fixed_time_plan(const QuantumIsingParams& p, double T, int L, double K = 1.0);

// U_{L-1} ... U_0 with U_k = e^{-i tau H0} e^{-i tau H1(k tau)}
CircuitProgram trotter_circuit(const QuantumIsingParams& p, const AdiabaticPlan& plan);
// adjoint of a program made of real-parameter diagonal and G layers
CircuitProgram adjoint(const CircuitProgram& program);

// <+| W_0^dag ... W_{L'-1}^dag U_{L-1} ... U_0 |+> by statevector
cplx statevector_overlap(const QuantumIsingParams& p, const AdiabaticPlan& plan, const QuantumIsingParams& q,
                         const AdiabaticPlan& qplan);

// spectral norm of e^{-i tau H0} e^{-i tau s H1} - e^{-i tau H(s)}
double trotter_step_error(const QuantumIsingParams& p, double s, double tau);

// |<G(h_perp)|G(h_perp + dh)>| for each h_perp, exact ground states
std::vector<double> fidelity_sweep(const QuantumIsingParams& p, std::span<const double> h_perp, double dh);

// ---------------------------------------------------------------------------
// Transfer-matrix form of the transverse step
// ---------------------------------------------------------------------------

// e^{-i a X} = scale * T(beta_+) T(beta_-), T(b) = [[e^b, e^-b], [e^-b, e^b]],
// with e^{-2 beta_pm} = -+ i (1 +- eps) and 2 eps / (2 - eps^2) = tan a.
// eps carries the sign of a; |tan a| < 2 keeps |eps| < 1.
double transverse_epsilon(double a);
std::array<cplx, 2> transverse_couplings(double a);  // {beta_+, beta_-}
double transverse_scale(double epsilon);             // sqrt((1 - eps^2) / (eps^4 + 4))

// Axis order everywhere below: beta_+, beta_-, beta'_+, beta'_-, beta, beta'.
enum CouplingAxis { plus = 0, minus = 1, plus_prime = 2, minus_prime = 3, row = 4, row_prime = 5 };

struct CouplingVector {
    std::array<cplx, 6> beta{};
    double epsilon = 0;        // U steps, a = -tau h_perp
    double epsilon_prime = 0;  // W^dag steps, a = tau' h'_perp
};

// The U steps realize e^{+i tau h_perp X}, so their couplings are those of
// a = -tau h_perp; the W^dag steps realize e^{-i tau' h'_perp X}.
CouplingVector beta_star(double tau, double h_perp, double tau_prime, double h_perp_prime, double J, double J_prime,
                         double T, double T_prime, int L, int L_prime);

// ---------------------------------------------------------------------------
// Classical slab
// ---------------------------------------------------------------------------

// 2(L + L') + 1 copies of the quantum lattice. Gap g joins slice g and g+1
// with coupling axis gap_axis[g]; slice t carries mult[t] * (sum ZZ + r sum Z)
// with the row axis slice_axis[t] (r the field ratio of that half).
struct OverlapSlab {
    Lattice slice;
    int L = 1;
    int L_prime = 1;
    double field_ratio = 0;        // h / J
    double field_ratio_prime = 0;  // h' / J'
    std::vector<int> gap_axis;
    std::vector<int> slice_axis;
    std::vector<int> slice_mult;

    int slices() const noexcept { return static_cast<int>(slice_axis.size()); }
    // m_j: the partition function is a Laurent polynomial of degree m_j in e^{beta^j}
    std::array<long long, 6> half_degrees() const;
};

OverlapSlab overlap_slab(const Lattice& slice, int L, int L_prime, double field_ratio, double field_ratio_prime);

// weight-form model for the six couplings
ComplexIsingModel slab_model(const OverlapSlab& slab, const std::array<cplx, 6>& beta);

struct OverlapInstance {
    OverlapSlab slab;
    CouplingVector couplings;
    ComplexIsingModel model;  // at the target couplings
    cplx prefactor;           // f = prefactor * Z
};

OverlapInstance overlap_instance(const QuantumIsingParams& p, const AdiabaticPlan& plan, const QuantumIsingParams& q,
                                 const AdiabaticPlan& qplan);
cplx instance_overlap(const OverlapInstance& inst, const EnumerationOptions& opts = {});

// ---------------------------------------------------------------------------
// Six-axis reconstruction from real couplings
// ---------------------------------------------------------------------------

// Per-axis nodes in x = e^{-beta}; axis j has degree[j] + 1 nodes.
struct MeshSpec {
    std::vector<int> degree;
    std::vector<std::vector<ExtReal>> nodes;

    // x_i = i / (n + 1), i = 1..n+1
    static MeshSpec full(std::span<const int> degrees);
    // x_i = anchor + (width / n) (i - 1)
    static MeshSpec windowed(std::span<const int> degrees, std::span<const double> anchors,
                             std::span<const double> widths);

    std::size_t size() const;
    void validate() const;
};

// degrees 2 m_j of a slab
std::vector<int> slab_degrees(const OverlapSlab& slab);

// Z at the real couplings beta^j = -ln x_j
using CouplingSampler = std::function<ExtReal(std::span<const ExtReal> x)>;

// exact slab partition function, evaluated as a polynomial in x
CouplingSampler exact_slab_sampler(const OverlapSlab& slab);

// prefactor * B(beta*) sum_i B^{-1}(beta_i) Z(beta_i) prod_j l_{j,i_j}(x_j(beta*)),
// B_j(b) = e^{n_j b / 2}; with prefactor 1 this is Z(beta*)
ExtComplex mesh_reconstruct(const CouplingSampler& sampler, const MeshSpec& mesh, std::span<const cplx> target,
                            cplx prefactor = 1.0, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Precision requirements
// ---------------------------------------------------------------------------

// (1 - e^-b) ln(1 - e^-b) - b e^-b - 7/8
double precision_g(double beta);
// {argmin, min} of precision_g over b > 0
std::pair<double, double> precision_g_minimum();

struct PrecisionInputs {
    double T = 1, T_prime = 1;
    int L = 2, L_prime = 2;
    int sites = 2;
    std::vector<int> degree;    // n_j
    std::vector<double> beta;   // real sampling couplings
    std::vector<double> window; // Delta_j; empty means the full range
};

// natural log of the tolerated error per sample; full range uses a = -1.6
double log_precision_bound(const PrecisionInputs& in);

}  // namespace ising_lab

#pragma once

#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "ising_lab/ising_model.hpp"
#include "json.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Global gates on a mirrored chain of 2n qubits
// ---------------------------------------------------------------------------

enum class GateKind { cp, sigma, hadamard, shift };
enum class PauliAxis { x, y, z };

// sigma: prod_j exp(i theta/2 sigma^axis_j); cp: controlled phase on every
// neighbouring pair; hadamard: exp(i pi/(2 sqrt 2)(sigma^x + sigma^z)) on every
// qubit; shift: sigma_z(pi) sigma_y(pi/2) cp (cp applied first).
struct GlobalGate {
    GateKind kind = GateKind::cp;
    PauliAxis axis = PauliAxis::z;
    double theta = 0;
    int power = 1;  // repeat count, used for shift powers

    static GlobalGate controlled_phase() { return {GateKind::cp, PauliAxis::z, 0, 1}; }
    static GlobalGate rotation(PauliAxis a, double t) { return {GateKind::sigma, a, t, 1}; }
    static GlobalGate hadamard() { return {GateKind::hadamard, PauliAxis::z, 0, 1}; }
    static GlobalGate shift(int p) { return {GateKind::shift, PauliAxis::z, 0, p}; }
};

// A gate sequence is listed in application order (first applied first).
using GlobalSequence = std::vector<GlobalGate>;

struct LogicalGate {
    enum class Kind { z, x, v, hadamard } kind = Kind::z;
    int qubit = 1;  // 1-based logical index; v acts on (qubit, qubit + 1)
    double alpha = 0;
};

// global-gate sequence equal to the logical gate on the mirrored register
// (physical qubits k-1 and 2n-k), up to a global phase
GlobalSequence compile_logical(const LogicalGate& gate, int logical_qubits);

// dense unitary of a sequence on `qubits` qubits, column-major over basis
// states with qubit j = bit j
std::vector<cplx> global_unitary(std::span<const GlobalGate> sequence, int qubits);

// dense unitary of the logical gate on the mirrored register
std::vector<cplx> logical_target(const LogicalGate& gate, int logical_qubits);

// |<a, b>| / (|a| |b|) style comparison: max entry deviation after removing the
// best global phase
double distance_up_to_phase(std::span<const cplx> a, std::span<const cplx> b);

// ---------------------------------------------------------------------------
// T operators and the Ising instance
// ---------------------------------------------------------------------------

// cp^{e0} sigma_z(pi/8)^{e1} H^{hadamard} with H the standard Hadamard applied
// first. The amplitude of a sequence is <+| T_{M-1} ... T_0 |+>.
struct TOperator {
    bool cp = false;
    bool phase = false;
    bool hadamard = true;
};

// Rewrites a sequence of cp, sigma_z(k pi/8) and hadamard gates as T operators
// (hadamard pairs absorb extra diagonal factors); throws on other gates.
std::vector<TOperator> lower_to_t_operators(std::span<const GlobalGate> sequence);

// statevector amplitude on 2n qubits
cplx t_sequence_amplitude(std::span<const TOperator> ops, int logical_qubits);

// amplitude = prefactor * sum_s exp(-i pi H(s) / 16) with all couplings in
// {4} and fields in [0, 16). Site (qubit q, step s) is q + 2n s.
struct IsingInstance {
    IsingModel model;
    cplx prefactor = 1;
    int logical_qubits = 0;
    int steps = 0;
    long long mprime = 0;  // sum J + sum h = max |H|

    // 2^{-n(M+2)}, the conventional normalization; prefactor / this is the
    // remaining phase-and-scale factor
    double conventional_normalization() const;
};

IsingInstance circuit_to_ising(std::span<const TOperator> ops, int logical_qubits);

long long mprime_bound(int logical_qubits, int steps);

// ---------------------------------------------------------------------------
// Lagrange reconstruction
// ---------------------------------------------------------------------------

using ExtReal = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;
using ExtComplex = boost::multiprecision::number<boost::multiprecision::cpp_complex_backend<200>>;

// barycentric evaluation of the interpolating polynomial
cplx lagrange_estimate(std::span<const double> nodes, std::span<const cplx> values, cplx target);
ExtComplex lagrange_estimate(std::span<const ExtReal> nodes, std::span<const ExtComplex> values,
                             const ExtComplex& target);

// log of the sufficient oracle error bound and of its large-size form
// nM(49 beta - 190)
struct DeltaBound {
    double log_gamma_form;
    double log_asymptotic;
};

DeltaBound required_delta(int logical_qubits, int steps, double beta);

// Z_hat(beta) at the requested inverse temperature
using PartitionOracle = std::function<ExtReal(const ExtReal& beta)>;

// exact Z(beta) of an integer model from its energy histogram
PartitionOracle exact_oracle(const IsingModel& model);

struct Reconstruction {
    cplx amplitude;
    int nodes = 0;
    std::vector<double> betas;
};

// Nodes e^{-beta_j} = j/K, j = 1..K; K defaults to 2 M' + 1.
Reconstruction reconstruct_amplitude(const PartitionOracle& oracle, const IsingInstance& instance, int nodes = 0);

nlohmann::json instance_sidecar(const IsingInstance& instance, int nodes);

}  // namespace ising_lab

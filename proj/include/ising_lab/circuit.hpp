#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ising_lab/ising_model.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

// Dense register of n qubits. Bit q of a basis index is qubit q; a clear bit is
// the +1 eigenstate of sigma^z, matching the spin encoding of ising_model.hpp.
class QuantumState {
public:
    explicit QuantumState(int qubits);  // |0...0>
    static QuantumState basis(int qubits, std::uint64_t index);
    static QuantumState plus(int qubits);  // |+_x>^n
    static QuantumState from_amplitudes(std::vector<cplx> amps);

    int qubits() const noexcept { return n_; }
    std::size_t dimension() const noexcept { return amps_.size(); }
    std::span<cplx> amplitudes() noexcept { return amps_; }
    std::span<const cplx> amplitudes() const noexcept { return amps_; }
    cplx& operator[](std::size_t i) { return amps_[i]; }
    const cplx& operator[](std::size_t i) const { return amps_[i]; }

    double norm() const;
    cplx inner(const QuantumState& ket) const;  // <this|ket>

private:
    int n_;
    std::vector<cplx> amps_;
};

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

// Parameters are complex so the same layers can describe the analytically
// continued (non-unitary) circuits used during reconstruction.

// multiplies |s> by exp[i alpha (sum offsets + sum h s + sum J s s')]
struct DiagonalLayer {
    cplx alpha = 1.0;
    std::vector<cplx> couplings;  // per lattice edge
    std::vector<cplx> fields;     // per site
    std::vector<cplx> offsets;    // per site, may be empty
};

// per-site [[cos, -sin], [sin, cos]] in the (+1, -1) basis
struct RotationLayer {
    std::vector<cplx> angles;
};

// per-site diag(e^{i phi}, e^{-i phi}) = exp(i phi sigma^z)
struct PhaseLayer {
    std::vector<cplx> angles;
};

// per-site Hadamard-conjugated phase gate H diag(1, e^{i theta}) H
struct GLayer {
    std::vector<cplx> angles;
};

using Layer = std::variant<DiagonalLayer, RotationLayer, PhaseLayer, GLayer>;

struct CircuitProgram {
    Lattice lattice;
    std::vector<Layer> layers;  // applied first to last

    int qubits() const noexcept { return lattice.size(); }
};

void validate(const CircuitProgram& program);

void apply_diagonal_layer(QuantumState& state, const Lattice& lattice, const DiagonalLayer& layer);
void apply_rotation_layer(QuantumState& state, const RotationLayer& layer);
void apply_phase_layer(QuantumState& state, const PhaseLayer& layer);
void apply_g_layer(QuantumState& state, const GLayer& layer);
void apply_layer(QuantumState& state, const Lattice& lattice, const Layer& layer);
void apply_program(QuantumState& state, const CircuitProgram& program);

// 2x2 single-qubit matrices, row index = output bit
using Matrix2 = std::array<std::array<cplx, 2>, 2>;
Matrix2 rotation_matrix(cplx theta);
Matrix2 g_matrix(cplx theta);

// Exponential form of a rotation: <s'|U(theta)|s> = exp[K s s' + i pi/4 (s' - s) + B]
cplx rotation_coupling(cplx theta);  // K
cplx rotation_offset(cplx theta);    // B

struct SimulationOptions {
    int max_qubits = 24;
    int max_trace_qubits = 12;
};

// <+_x^n| W |+_x^n>
cplx amplitude(const CircuitProgram& program, const SimulationOptions& opts = {});
// Tr W / 2^n
cplx trace_amplitude(const CircuitProgram& program, const SimulationOptions& opts = {});

// ---------------------------------------------------------------------------
// Layered programs and their classical counterpart
// ---------------------------------------------------------------------------

// m time slices on one spatial lattice. Slice t carries a diagonal layer
// (alpha[t], couplings[t], fields[t], offsets[t]); between slices t and t+1 a
// rotation by angles[t] is conjugated by quarter-turn phase gates.
struct LayeredSpec {
    Lattice lattice;
    std::vector<cplx> alpha;                    // m
    std::vector<std::vector<cplx>> couplings;   // m x edges
    std::vector<std::vector<cplx>> fields;      // m x sites
    std::vector<std::vector<cplx>> offsets;     // m x sites (may be empty)
    std::vector<std::vector<cplx>> angles;      // (m-1) x sites

    int slices() const noexcept { return static_cast<int>(alpha.size()); }
};

void validate(const LayeredSpec& spec);

CircuitProgram layered_program(const LayeredSpec& spec);

// Classical model on the enlarged lattice (site i of slice t -> i + n t) in
// weight form, with amplitude = prefactor * boltzmann_sum(model).
struct EnlargedInstance {
    ComplexIsingModel model;
    cplx prefactor;
};

EnlargedInstance enlarged_instance(const LayeredSpec& spec);

// ---------------------------------------------------------------------------
// Measurement protocols
// ---------------------------------------------------------------------------

enum class Protocol { squared_overlap = 1, overlap = 2 };

struct ProtocolOptions {
    bool trace = false;  // protocol 2 with a maximally mixed register
    unsigned threads = 1;
    SimulationOptions sim{};
};

// Per shot the register yields n outcomes; the recorded value is their product.
struct ProtocolEstimate {
    cplx value;                                  // sample mean (real part only for protocol 1)
    cplx exact;                                  // the quantity being estimated
    std::vector<std::vector<std::int8_t>> shots;  // per observable (x, then y), per shot
    std::vector<double> standard_error;           // per observable
};

ProtocolEstimate simulate_protocol(const CircuitProgram& program, Protocol which, std::uint64_t shots,
                                   std::uint64_t seed, const ProtocolOptions& opts = {});

// Statistics of a product-of-outcomes shot whose last outcome has <sigma> = target
// when the first n-1 are fair coins.
std::vector<std::int8_t> sample_register(int register_size, double target, std::uint64_t shots,
                                         std::uint64_t seed, std::uint64_t stream, unsigned threads = 1);

// Full-register expectations for small programs (n <= 4): protocol 1 on 3n
// qubits, protocol 2 on 2n qubits with every gate controlled by the register.
double full_register_protocol1(const CircuitProgram& program);
cplx full_register_protocol2(const CircuitProgram& program);

}  // namespace ising_lab

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vqls/cost.hpp"
#include "vqls/problem.hpp"
#include "vqls/simulator.hpp"

namespace vqls {

class Rng;

enum class AnsatzFamily { Hea, Qaoa, Variable };
std::string to_string(AnsatzFamily f);

// One structural slot of V(alpha): a gate whose angle either is fixed or is
// bound from the parameter vector.
struct AnsatzSlot {
    Gate gate;                     // theta is the fixed angle when param < 0
    int param = -1;                // index into alpha
    bool driver = false;           // QAOA driver slot: angle *= driver_scale
    bool shift_compatible = true;  // gate is e^{-i alpha sigma/2}
};

// Trial-circuit family: the gate placement vector plus continuous parameters.
struct Ansatz {
    int n = 0;
    AnsatzFamily family = AnsatzFamily::Hea;
    std::vector<AnsatzSlot> structure;
    std::vector<double> parameters;  // default binding values
    double driver_scale = 1.0;       // QAOA only
    bool extended_alphabet = false;  // RotZ rotations available (complex A)

    std::size_t num_parameters() const;
    std::size_t num_gates() const { return structure.size(); }
    bool all_shift_compatible() const;

    // Structural circuit with the given parameter values bound.
    Circuit bind(std::span<const double> alpha) const;
    Circuit bind() const { return bind(parameters); }
};

// Layered hardware-efficient ansatz: one RotY column, then per layer CZ on
// pairs (0,1),(2,3),... followed by RotY on the qubits just entangled, then
// CZ on pairs (1,2),(3,4),... followed by RotY on those qubits. All-zero
// parameters prepare |0...0>.
//
// Closed-form counts (asserted by tests): parameters = n + 2*layers*(n-1),
// gates = parameters + layers*(n-1). The published figure for this layout
// quotes 640 gates / 440 parameters at n=50, layers=4; no alternating-pair
// linear layout reproduces that tally exactly, and this implementation counts
// 638/442 there. With `extended_alphabet` every RotY is followed by a RotZ
// (its own parameter) for problems with complex amplitudes.
Ansatz build_hea(int n, int layers, bool extended_alphabet = false);

struct QaoaSpec {
    int rounds = 1;                         // p
    CostKind driver = CostKind::GlobalHat;  // H_G or H_L as driver Hamiltonian
    double driver_scale = 1.0;              // multiplies odd-index (driver) angles
};

// QAOA ansatz: H^{x n} initialization followed by p alternating evolutions
// e^{-i H_D a_1}, e^{-i H_M a_2}, ... with H_D the effective Hamiltonian of
// the chosen cost kind (assembled densely and cached) and H_M = X^{x n}.
// Capped at 12 qubits.
Ansatz build_qaoa(const QlspInstance& inst, const QaoaSpec& spec);

// Product ansatz: one RotY per qubit (the structure used for the inline
// hardware-style runs). Family is Variable so it can also be grown.
Ansatz build_product(int n);

// Random variable-structure start: a rotation column plus `blocks` identity
// insertion blocks at random positions. With `extended_alphabet` every RotY
// is paired with a RotZ so complex-amplitude solutions are reachable.
Ansatz random_variable_ansatz(int n, int blocks, Rng& rng,
                              bool extended_alphabet = false);

// |x(alpha)> = V(alpha)|0...0>.
Statevector prepare_state(const Ansatz& a, std::span<const double> alpha);

// Inserts a parameterized identity block at a random position: RotY(theta_a)
// on one qubit of a random neighbor edge, CZ on the edge, RotY(theta_b) on
// the same qubit, CZ again. All angles start at 0, so the inserted block
// compiles to the identity and the cost at the grown point is unchanged.
// Adds 4 gates and 2 parameters; with the extended alphabet each RotY is
// followed by a RotZ (6 gates, 4 parameters).
Ansatz grow_variable(const Ansatz& a, std::uint64_t seed);

}  // namespace vqls

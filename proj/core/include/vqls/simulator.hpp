#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vqls {

using cplx = std::complex<double>;

// Hard default cap on simulated qubit count; 2^14 complex doubles per buffer
// keeps full test runs inside a laptop budget. Callers may override per state.
inline constexpr int kDefaultQubitCap = 14;

// Dense n-qubit state. Amplitude ordering is little-endian: qubit q is bit q
// of the array index, so |q1 q0> = |10> lives at index 2.
//
// States are normalized by construction and every circuit run re-checks the
// norm, unless `allow_unnormalized` is set; that flag exists for vectors like
// A|x> whose norm carries information.
class Statevector {
  public:
    Statevector() = default;
    explicit Statevector(int n, bool allow_unnormalized = false,
                         int qubit_cap = kDefaultQubitCap);
    static Statevector from_amplitudes(int n, std::vector<cplx> amps,
                                       bool allow_unnormalized = false);

    int num_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    bool allow_unnormalized() const { return allow_unnormalized_; }
    void set_allow_unnormalized(bool v) { allow_unnormalized_ = v; }

    const std::vector<cplx>& amplitudes() const { return amps_; }
    std::vector<cplx>& amplitudes() { return amps_; }
    cplx operator[](std::size_t i) const { return amps_[i]; }

    double norm() const;
    double norm_sq() const;
    void normalize();

    Eigen::VectorXcd to_eigen() const;

  private:
    int n_ = 0;
    bool allow_unnormalized_ = false;
    std::vector<cplx> amps_;
};

enum class GateKind {
    RotY,                // e^{-i theta Y / 2}
    RotZ,                // e^{-i theta Z / 2}
    Hadamard,
    PauliX,
    PauliY,
    PauliZ,
    Phase,               // diag(1, e^{i theta}); S is Phase(pi/2)
    ControlledZ,
    ControlledNot,
    ControlledUnitary,   // inner gate sequence applied under one control qubit
    Unitary,             // explicit dense unitary on an ordered target list
    Evolution,           // e^{-i H theta} from a cached eigendecomposition
};

// Cached eigendecomposition of a Hermitian generator, shared between all
// Evolution gates built from it. `targets_hint` records the qubit block the
// generator was assembled on (size log2(dim)).
struct EvolutionGenerator {
    Eigen::MatrixXcd eigenvectors;
    Eigen::VectorXd eigenvalues;
    std::string label;
};

struct Gate {
    GateKind kind;
    std::vector<int> targets;  // RotY/RotZ/H/X/Y/Z/Phase: {q};
                               // CZ: {a, b}; CNOT: {control, target};
                               // ControlledUnitary: {control};
                               // Unitary/Evolution: ordered qubit block
    double theta = 0.0;        // rotation angle or evolution time
    std::vector<Gate> inner;   // ControlledUnitary body
    std::shared_ptr<const Eigen::MatrixXcd> matrix;          // Unitary
    std::shared_ptr<const EvolutionGenerator> generator;     // Evolution

    static Gate ry(int q, double theta);
    static Gate rz(int q, double theta);
    static Gate h(int q);
    static Gate x(int q);
    static Gate y(int q);
    static Gate z(int q);
    static Gate phase(int q, double theta);
    static Gate s(int q) { return phase(q, 1.5707963267948966); }
    static Gate cz(int a, int b);
    static Gate cnot(int control, int target);
    static Gate controlled(int control, std::vector<Gate> body);
    static Gate unitary(std::vector<int> targets, Eigen::MatrixXcd m);
    static Gate evolution(std::shared_ptr<const EvolutionGenerator> gen,
                          std::vector<int> targets, double time);

    Gate adjoint() const;

    // Dense matrix of this gate on its own target block (ControlledUnitary
    // expands over control + inner targets). Used by unitarity checks and by
    // circuit_unitary.
    Eigen::MatrixXcd block_matrix() const;

    // Sorted list of every qubit the gate touches (controls included).
    std::vector<int> touched_qubits() const;

    // Same gate with every qubit index shifted by `offset`.
    Gate shifted(int offset) const;
};

struct Circuit {
    int n = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    explicit Circuit(int n) : n(n) {}
    Circuit(int n, std::vector<Gate> gates) : n(n), gates(std::move(gates)) {}

    Circuit& add(Gate g) {
        gates.push_back(std::move(g));
        return *this;
    }
    std::size_t size() const { return gates.size(); }

    // Reversed gate order with every gate inverted.
    Circuit adjoint() const;
    // Circuit acting on n + offset... a wider register, indices shifted up.
    Circuit shifted(int new_n, int offset) const;
    // Concatenation: this circuit followed by `rhs`.
    Circuit then(const Circuit& rhs) const;
};

// --- Core operations -------------------------------------------------------

// Applies one gate in place; throws std::invalid_argument on bad targets.
void apply_gate(Statevector& state, const Gate& g);

// Pure-function variant returning a fresh state.
Statevector apply_gate(const Statevector& state, const Gate& g);

// Runs all gates in order on a copy of `initial`. Norm is re-checked after
// the run unless the state allows unnormalized content.
Statevector run_circuit(const Circuit& c, const Statevector& initial);

// <a|b> with conjugation on the first argument.
cplx inner_product(const Statevector& a, const Statevector& b);

// <state| P |state> for a Pauli word over {I,X,Y,Z}. Words shorter than n are
// padded with I on the high qubits; character i addresses qubit i.
double expectation_pauli(const Statevector& state, std::string_view pauli);

// Dense 2^n x 2^n unitary of the whole circuit (column j = circuit applied to
// basis state |j>). Capped at 12 qubits.
Eigen::MatrixXcd circuit_unitary(const Circuit& c);

// --- Construction helpers --------------------------------------------------

// |0...0> on n qubits.
Statevector zero_state(int n);

// Circuit preparing `target` (up to an unobservable global phase) from
// |0...0> via a recursive RotY cascade plus per-basis-state phase gates.
// Test/diagnostic plumbing: gate count grows like 2^n.
Circuit state_preparation_circuit(const std::vector<cplx>& target);

// Circuit applying one Pauli word (gate per non-identity character).
Circuit pauli_word_circuit(int n, std::string_view pauli);

// X-wrapped multi-controlled Z selecting the all-zeros pattern of `qubits`:
// flips the sign of every basis state whose bits on `qubits` are all 0.
// This is exp(i*pi*P) with P the projector onto that pattern.
Circuit phase_flip_on_all_zeros(int n, const std::vector<int>& qubits);

// Uniformly random state, real amplitudes optional.
Statevector random_state(int n, class Rng& rng, bool real_amplitudes = false);

}  // namespace vqls

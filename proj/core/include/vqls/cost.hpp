#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqls/problem.hpp"
#include "vqls/simulator.hpp"

namespace vqls {

class Rng;

// The four cost functions. Hat kinds are the raw effective-Hamiltonian
// expectations; the normalized kinds divide by <psi|psi> with psi = A|x>.
enum class CostKind { GlobalHat, Global, LocalHat, Local };

inline bool is_global(CostKind k) {
    return k == CostKind::GlobalHat || k == CostKind::Global;
}
inline bool is_normalized(CostKind k) {
    return k == CostKind::Global || k == CostKind::Local;
}
std::string to_string(CostKind k);
CostKind cost_kind_from_string(const std::string& s);

enum class CostBackend { Direct, CircuitTests };

// Routes for the delta terms on the circuit backend: the algebraic split
// delta = (beta + <...Z_j...>)/2 with a Hadamard test for the Z_j element, or
// the Hadamard-Overlap route averaged over bit-flip strings.
enum class DeltaRoute { HadamardSplit, OverlapAverage };

struct ShotConfig {
    enum class Mode { Exact, Sampled };
    Mode mode = Mode::Exact;
    std::uint64_t shots_per_term = 0;
    std::uint64_t seed = 0;

    static ShotConfig exact() { return {}; }
    static ShotConfig sampled(std::uint64_t shots, std::uint64_t seed) {
        return {Mode::Sampled, shots, seed};
    }
    bool exact_mode() const { return mode == Mode::Exact; }
};

// Full cost evaluation record: the value, its normalization, and the raw
// beta/gamma/delta constituents it was assembled from. Gamma is filled for
// global kinds, delta for local kinds.
struct CostReport {
    CostKind kind = CostKind::GlobalHat;
    double value = 0.0;
    double psi_norm_sq = 0.0;
    Eigen::MatrixXcd beta;
    Eigen::MatrixXcd gamma;
    std::vector<Eigen::MatrixXcd> delta;  // one L x L matrix per qubit j
    std::uint64_t shots_used = 0;         // 0 in exact mode
    double value_stderr = 0.0;            // propagated shot noise, sampled mode
    std::uint64_t overlap_raw_shots = 0;         // overlap-test bookkeeping
    std::uint64_t overlap_postselected_shots = 0;
};

// Fixed-order compensated reduction of sum_{l,l'} c_l conj(c_{l'}) m_{l,l'}
// for a Hermitian term matrix m; used to assemble <psi|psi>, |<b|psi>|^2 and
// the local projector sum from report constituents.
double lcu_quadratic_sum(const LcuMatrix& a, const Eigen::MatrixXcd& m);

// --- Individual matrix elements (direct statevector evaluation) -------------

// beta_{l l'} = <0|V^dag A_{l'}^dag A_l V|0>
cplx beta_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
               std::size_t lp);

// gamma_{l l'} = <0|U^dag A_l V|0> <0|V^dag A_{l'}^dag U|0>
cplx gamma_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
                std::size_t lp);

// delta^{(j)}_{l l'} = <0|V^dag A_{l'}^dag U (|0_j><0_j| x I) U^dag A_l V|0>
cplx delta_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
                std::size_t lp, int j);

// --- Full cost evaluation ----------------------------------------------------

struct CostOptions {
    CostBackend backend = CostBackend::Direct;
    ShotConfig shots = ShotConfig::exact();
    DeltaRoute delta_route = DeltaRoute::HadamardSplit;
    int threads = 1;
};

CostReport evaluate_cost(const QlspInstance& inst, const Circuit& v,
                         CostKind kind, const CostOptions& options = {});

// --- Simulated measurement-probability estimators ----------------------------

enum class Part { Real, Imag };

// Ancilla Hadamard test estimating Re or Im of <0|V^dag W V|0> with
// W = controlled_ops[k-1] * ... * controlled_ops[0]. Exact mode returns
// P(0) - P(1) computed from the final distribution; sampled mode draws
// shots_per_term ancilla outcomes.
struct HadamardTestPlan {
    Circuit state_prep;                  // applied uncontrolled (V)
    std::vector<Circuit> controlled_ops; // each applied under the ancilla
};
double hadamard_test(const HadamardTestPlan& plan, Part part,
                     const ShotConfig& shots);

// Hadamard-Overlap test on 2n+1 qubits estimating Re or Im of
// gamma_{l l'} = <0|U^dag A_l V|0><0|V^dag A_{l'}^dag U|0> without
// controlling U or V. The estimate is the expectation of
// (swap parity) * (-1)^ancilla after the transversal CNOT+H readout.
struct OverlapEstimate {
    double value = 0.0;
    std::uint64_t raw_shots = 0;           // 0 in exact mode
    std::uint64_t postselected_shots = 0;  // shots whose ancilla read 0
};
OverlapEstimate overlap_test(const Circuit& u, const Circuit& v,
                             const Circuit& a_l, const Circuit& a_lp,
                             Part part, const ShotConfig& shots);

// delta^{(j)}_{l l'} through the Overlap route: the projector on qubit j is
// resolved as a sum over the 2^{n-1} bit-flip prefixes R_j applied to the U
// register. Exact mode enumerates every prefix; sampled mode draws prefixes.
cplx delta_via_overlap(const QlspInstance& inst, const Circuit& v,
                       std::size_t l, std::size_t lp, int j,
                       const ShotConfig& shots);

// Dense effective Hamiltonians backing the costs: H_G = A^dag (I - |b><b|) A
// and H_L = A^dag U (I - (1/n) sum_j |0_j><0_j| x I) U^dag A.
Eigen::MatrixXcd effective_hamiltonian(const QlspInstance& inst, CostKind kind);

// --- Choi-state identity ------------------------------------------------------

// Builds the 2n-qubit Choi states of u_tilde and v_tilde through a maximally
// entangling layer, evaluates the Global cost with A = I, and returns it with
// |Tr(V~^dag U~)|^2 / d^2; the pair satisfies cost = 1 - trace_magnitude.
struct ChoiIdentityResult {
    double cost = 0.0;
    double trace_magnitude = 0.0;
};
ChoiIdentityResult choi_cost_identity_check(const Circuit& u_tilde,
                                            const Circuit& v_tilde);

// Maximally entangling layer E on 2n qubits (H + transversal CNOT), with
// E|0...0> the uniform maximally entangled state between halves.
Circuit maximally_entangling_circuit(int n);

}  // namespace vqls

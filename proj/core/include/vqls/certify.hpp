#pragma once

#include <string>
#include <vector>

#include "vqls/cost.hpp"
#include "vqls/problem.hpp"
#include "vqls/simulator.hpp"

namespace vqls {

struct ObservableRecord {
    std::string pauli;
    double expectation = 0.0;      // <M> on the prepared |x>
    double deviation_bound = 0.0;  // D(M) <= 2 * epsilon_upper for Pauli M
};

// Guarantee attached to a finished solve: the final cost value converted into
// an upper bound on the trace distance to the exact solution.
struct Certificate {
    CostKind kind = CostKind::Local;
    double cost_value = 0.0;
    double kappa = 0.0;
    int n = 0;
    double psi_norm_sq = 0.0;
    double epsilon_upper = 0.0;
    std::vector<ObservableRecord> observables;
    Circuit solution_circuit;  // bound V(alpha_opt); lets `verify` re-check
    std::string label;
};

// sqrt(1 - |<x|x0>|^2); the pure-state trace distance.
double trace_distance_pure(const Statevector& x, const Statevector& x0);

// Inverse of the cost lower bounds: kappa*sqrt(c) for the global kinds,
// kappa*sqrt(n c) for LocalHat and kappa*sqrt(n c <psi|psi>) for Local,
// clipped to [0, 1].
double epsilon_bound(const CostReport& report, double kappa, int n);
double epsilon_bound_value(CostKind kind, double cost, double psi_norm_sq,
                           double kappa, int n);

struct ObservableDeviation {
    double value = 0.0;    // |<x|M|x> - <x0|M|x0>|
    double squared = 0.0;  // D(M)^2
};
ObservableDeviation observable_deviation(const Statevector& x,
                                         const Statevector& x0,
                                         const std::string& pauli);

// Dense spectrum check of H_G: the ground energy must vanish and the first
// excited energy must clear 1/kappa^2.
struct SpectralReport {
    double e0 = 0.0;
    double e1 = 0.0;
    bool gap_ok = false;
};
SpectralReport spectral_check(const QlspInstance& inst);

// Assembles a certificate from a finished evaluation. kappa comes from the
// instance metadata; for file-loaded instances without one, the dense
// estimate is used (n <= 10).
Certificate make_certificate(const QlspInstance& inst, const CostReport& report,
                             const Circuit& solution,
                             const std::vector<std::string>& observables = {});

}  // namespace vqls

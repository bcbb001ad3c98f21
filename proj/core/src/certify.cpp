#include "vqls/certify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("certify: " + msg);
}

}  // namespace

double trace_distance_pure(const Statevector& x, const Statevector& x0) {
    if (x.num_qubits() != x0.num_qubits()) fail("trace distance dimension mismatch");
    const double overlap_sq = std::norm(inner_product(x, x0));
    return std::sqrt(std::max(0.0, 1.0 - std::min(overlap_sq, 1.0)));
}

double epsilon_bound_value(CostKind kind, double cost, double psi_norm_sq,
                           double kappa, int n) {
    if (kappa <= 1.0) fail("epsilon bound needs kappa > 1");
    if (cost < 0.0) fail("epsilon bound needs a nonnegative cost");
    double eps;
    switch (kind) {
        case CostKind::GlobalHat:
        case CostKind::Global:
            eps = kappa * std::sqrt(cost);
            break;
        case CostKind::LocalHat:
            if (n < 1) fail("epsilon bound needs n >= 1");
            eps = kappa * std::sqrt(static_cast<double>(n) * cost);
            break;
        case CostKind::Local:
            if (n < 1) fail("epsilon bound needs n >= 1");
            if (psi_norm_sq < 0.0) fail("epsilon bound needs <psi|psi> >= 0");
            eps = kappa * std::sqrt(static_cast<double>(n) * cost * psi_norm_sq);
            break;
        default:
            fail("unknown cost kind");
    }
    return std::clamp(eps, 0.0, 1.0);
}

double epsilon_bound(const CostReport& report, double kappa, int n) {
    return epsilon_bound_value(report.kind, report.value, report.psi_norm_sq,
                               kappa, n);
}

ObservableDeviation observable_deviation(const Statevector& x,
                                         const Statevector& x0,
                                         const std::string& pauli) {
    if (x.num_qubits() != x0.num_qubits()) fail("observable dimension mismatch");
    const double ex = expectation_pauli(x, pauli);
    const double ex0 = expectation_pauli(x0, pauli);
    ObservableDeviation d;
    d.value = std::abs(ex - ex0);
    d.squared = d.value * d.value;
    return d;
}

SpectralReport spectral_check(const QlspInstance& inst) {
    if (inst.A.n > 10) fail("spectral_check capped at 10 qubits");
    double kappa;
    if (inst.kappa) {
        kappa = *inst.kappa;
    } else {
        kappa = estimate_kappa_dense(inst.A);
    }
    const Eigen::MatrixXcd hg = effective_hamiltonian(inst, CostKind::GlobalHat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hg);
    if (es.info() != Eigen::Success) fail("eigensolver failed");
    SpectralReport report;
    report.e0 = es.eigenvalues()(0);
    report.e1 = es.eigenvalues()(1);
    if (std::abs(report.e0) > 1e-9) {
        throw std::runtime_error(
            "certify: ground energy of H_G is " + std::to_string(report.e0) +
            ", expected 0");
    }
    report.gap_ok = report.e1 >= 1.0 / (kappa * kappa) - 1e-9;
    return report;
}

Certificate make_certificate(const QlspInstance& inst, const CostReport& report,
                             const Circuit& solution,
                             const std::vector<std::string>& observables) {
    Certificate cert;
    cert.kind = report.kind;
    cert.cost_value = report.value;
    cert.n = inst.A.n;
    cert.psi_norm_sq = report.psi_norm_sq;
    cert.label = inst.label;
    cert.solution_circuit = solution;
    if (inst.kappa) {
        cert.kappa = *inst.kappa;
    } else {
        cert.kappa = estimate_kappa_dense(inst.A);
    }
    cert.epsilon_upper = epsilon_bound(report, cert.kappa, cert.n);
    if (!observables.empty()) {
        const Statevector x = run_circuit(solution, zero_state(inst.A.n));
        for (const std::string& word : observables) {
            ObservableRecord rec;
            rec.pauli = word;
            rec.expectation = expectation_pauli(x, word);
            rec.deviation_bound = 2.0 * cert.epsilon_upper;
            cert.observables.push_back(std::move(rec));
        }
    }
    return cert;
}

}  // namespace vqls

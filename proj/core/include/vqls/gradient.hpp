#pragma once

#include <span>
#include <vector>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"

namespace vqls {

// Cost gradient, one entry per ansatz parameter (cost per radian).
struct GradientVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double max_abs() const;
    double norm() const;
};

struct GradientOptions {
    // Finite-difference fallback for parameters whose gates are not of the
    // e^{-i alpha sigma/2} form (QAOA evolution times). Off by default:
    // analytic_gradient then refuses such parameters.
    bool allow_fd_fallback = false;
    double fd_step = 1e-4;
    int threads = 1;
};

// Parameter-shift gradient: each compatible parameter is evaluated through
// the +-pi/2 shifted circuits, with term derivatives assembled into the cost
// derivative (quotient rule for the normalized kinds).
GradientVector analytic_gradient(const QlspInstance& inst, const Ansatz& a,
                                 std::span<const double> alpha, CostKind kind,
                                 const GradientOptions& options = {});

// Central differences (C(a + h e_i) - C(a - h e_i)) / 2h; the testing oracle.
GradientVector finite_difference_gradient(const QlspInstance& inst,
                                          const Ansatz& a,
                                          std::span<const double> alpha,
                                          CostKind kind, double h);

}  // namespace vqls

#include "vqls/gradient.hpp"

#include <cmath>
#include <stdexcept>

#include "vqls/stats.hpp"
#include "vqls/threading.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("gradient: " + msg);
}

constexpr double kHalfPi = 1.5707963267948966;

// psi^2 and the secondary sum (|<b|psi>|^2 or the local projector average)
// from a cost report's term matrices.
struct Sums {
    double p;  // <psi|psi>
    double s;  // secondary
};

Sums sums_from_report(const QlspInstance& inst, const CostReport& r) {
    Sums out{r.psi_norm_sq, 0.0};
    if (is_global(r.kind)) {
        out.s = lcu_quadratic_sum(inst.A, r.gamma);
    } else {
        KahanSum acc;
        for (const auto& dj : r.delta) {
            acc.add(lcu_quadratic_sum(inst.A, dj));
        }
        out.s = acc.value() / static_cast<double>(inst.A.n);
    }
    return out;
}

}  // namespace

double GradientVector::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GradientVector::norm() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc);
}

GradientVector finite_difference_gradient(const QlspInstance& inst,
                                          const Ansatz& a,
                                          std::span<const double> alpha,
                                          CostKind kind, double h) {
    if (!(h > 0.0)) fail("finite differences need h > 0");
    if (alpha.size() != a.num_parameters()) fail("parameter vector length mismatch");
    std::vector<double> base(alpha.begin(), alpha.end());
    GradientVector g;
    g.values.assign(base.size(), 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<double> up = base, down = base;
        up[i] += h;
        down[i] -= h;
        const double cu = evaluate_cost(inst, a.bind(up), kind).value;
        const double cd = evaluate_cost(inst, a.bind(down), kind).value;
        g.values[i] = (cu - cd) / (2.0 * h);
    }
    return g;
}

GradientVector analytic_gradient(const QlspInstance& inst, const Ansatz& a,
                                 std::span<const double> alpha, CostKind kind,
                                 const GradientOptions& options) {
    if (alpha.size() != a.num_parameters()) fail("parameter vector length mismatch");
    std::vector<bool> compatible(a.num_parameters(), true);
    for (const AnsatzSlot& s : a.structure) {
        if (s.param >= 0 && !s.shift_compatible) {
            compatible[static_cast<std::size_t>(s.param)] = false;
        }
    }
    for (std::size_t i = 0; i < compatible.size(); ++i) {
        if (!compatible[i] && !options.allow_fd_fallback) {
            fail("parameter " + std::to_string(i) +
                 " is not of the e^{-i alpha sigma/2} form; enable the "
                 "finite-difference fallback to differentiate it");
        }
    }

    CostOptions cost_opts;
    cost_opts.threads = options.threads;
    const CostReport base_report = evaluate_cost(inst, a.bind(alpha), kind, cost_opts);
    const Sums base = sums_from_report(inst, base_report);
    const std::vector<double> base_alpha(alpha.begin(), alpha.end());

    GradientVector g;
    g.values.assign(base_alpha.size(), 0.0);
    parallel_for(base_alpha.size(), options.threads, [&](std::size_t i) {
        if (!compatible[i]) {
            std::vector<double> up = base_alpha, down = base_alpha;
            up[i] += options.fd_step;
            down[i] -= options.fd_step;
            const double cu = evaluate_cost(inst, a.bind(up), kind).value;
            const double cd = evaluate_cost(inst, a.bind(down), kind).value;
            g.values[i] = (cu - cd) / (2.0 * options.fd_step);
            return;
        }
        std::vector<double> plus = base_alpha, minus = base_alpha;
        plus[i] += kHalfPi;
        minus[i] -= kHalfPi;
        const CostReport rp = evaluate_cost(inst, a.bind(plus), kind, {});
        const CostReport rm = evaluate_cost(inst, a.bind(minus), kind, {});
        const Sums sp = sums_from_report(inst, rp);
        const Sums sm = sums_from_report(inst, rm);
        // Term derivatives from the +-pi/2 shift identity.
        const double dp = (sp.p - sm.p) / 2.0;
        const double ds = (sp.s - sm.s) / 2.0;
        switch (kind) {
            case CostKind::GlobalHat:
            case CostKind::LocalHat:
                g.values[i] = dp - ds;
                break;
            case CostKind::Global:
            case CostKind::Local:
                // d(1 - S/P) = (S P' - S' P) / P^2
                g.values[i] = (base.s * dp - ds * base.p) / (base.p * base.p);
                break;
        }
    });
    return g;
}

}  // namespace vqls

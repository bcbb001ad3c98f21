#include "vqls/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vqls/rng.hpp"
#include "vqls/stats.hpp"
#include "vqls/threading.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("cost: " + msg);
}

constexpr double kSingularPsiTol = 1e-14;
constexpr double kRoundoffTol = 1e-9;

double clamp_roundoff(double value) {
    if (value >= 0.0) return value;
    if (value > -kRoundoffTol) return 0.0;
    throw std::runtime_error("cost: value " + std::to_string(value) +
                             " negative beyond roundoff");
}

// Applies every gate of `op` under an ancilla control.
void apply_controlled_circuit(Statevector& state, const Circuit& op, int control) {
    for (const Gate& g : op.gates) {
        apply_gate(state, Gate::controlled(control, {g}));
    }
}

std::uint64_t sample_binomial(Rng& rng, std::uint64_t trials, double p) {
    std::uint64_t k = 0;
    for (std::uint64_t s = 0; s < trials; ++s) k += rng.bernoulli(p) ? 1 : 0;
    return k;
}

// Statevectors A_l V|0>, plus U|0> and U^dag A_l V|0> on demand.
struct TermCache {
    Statevector v0;
    Statevector u0;
    std::vector<Statevector> w;
    std::vector<Statevector> phi;
};

TermCache build_cache(const QlspInstance& inst, const Circuit& v, bool need_phi,
                      int threads) {
    const std::size_t L = inst.A.size();
    TermCache cache;
    cache.v0 = run_circuit(v, zero_state(inst.A.n));
    cache.u0 = run_circuit(inst.b_prep, zero_state(inst.A.n));
    cache.w.resize(L);
    parallel_for(L, threads, [&](std::size_t l) {
        cache.w[l] = run_circuit(inst.A.terms[l].unitary, cache.v0);
    });
    if (need_phi) {
        const Circuit u_dag = inst.b_prep.adjoint();
        cache.phi.resize(L);
        parallel_for(L, threads, [&](std::size_t l) {
            cache.phi[l] = run_circuit(u_dag, cache.w[l]);
        });
    }
    return cache;
}

cplx delta_from_phi(const Statevector& phi_lp, const Statevector& phi_l, int j) {
    const std::uint64_t jbit = std::uint64_t{1} << j;
    const auto& a = phi_lp.amplitudes();
    const auto& b = phi_l.amplitudes();
    cplx acc{0.0, 0.0};
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        if (i & jbit) continue;
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

}  // namespace

// Fixed-order reduction using only the upper triangle of a Hermitian matrix.
double lcu_quadratic_sum(const LcuMatrix& a, const Eigen::MatrixXcd& m) {
    const std::size_t L = a.size();
    KahanSum acc;
    for (std::size_t l = 0; l < L; ++l) {
        acc.add(std::norm(a.terms[l].coeff) * m(l, l).real());
        for (std::size_t lp = l + 1; lp < L; ++lp) {
            const cplx cc = a.terms[lp].coeff * std::conj(a.terms[l].coeff);
            // c_{l'} conj(c_l) m_{l',l} + c.c. with m_{l',l} = conj(m_{l,l'}).
            acc.add(2.0 * (cc * std::conj(m(l, lp))).real());
        }
    }
    return acc.value();
}

namespace {

void validate_instance_circuit(const QlspInstance& inst, const Circuit& v) {
    if (inst.A.terms.empty()) fail("instance has an empty LCU");
    if (v.n != inst.A.n) fail("ansatz circuit register size mismatch");
    if (inst.b_prep.n != inst.A.n) fail("b_prep register size mismatch");
}

// One measured scalar of the circuit backend: its shot variance and its
// linear weights into psi2 / |<b|psi>|^2 / the local projector sum.
struct Measured {
    double variance = 0.0;
    double w_psi = 0.0;
    double w_bpsi = 0.0;
    double w_local = 0.0;
};

double estimator_variance(double estimate, const ShotConfig& shots) {
    if (shots.exact_mode()) return 0.0;
    const double v = (1.0 - estimate * estimate) /
                     static_cast<double>(shots.shots_per_term);
    return std::max(v, 0.0);
}

}  // namespace

std::string to_string(CostKind k) {
    switch (k) {
        case CostKind::GlobalHat: return "global_hat";
        case CostKind::Global: return "global";
        case CostKind::LocalHat: return "local_hat";
        case CostKind::Local: return "local";
    }
    return "?";
}

CostKind cost_kind_from_string(const std::string& s) {
    if (s == "global_hat") return CostKind::GlobalHat;
    if (s == "global") return CostKind::Global;
    if (s == "local_hat") return CostKind::LocalHat;
    if (s == "local") return CostKind::Local;
    fail("unknown cost kind '" + s + "'");
}

// --- Individual terms ---------------------------------------------------------

cplx beta_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
               std::size_t lp) {
    validate_instance_circuit(inst, v);
    if (l >= inst.A.size() || lp >= inst.A.size()) fail("term index out of range");
    const Statevector v0 = run_circuit(v, zero_state(inst.A.n));
    const Statevector wl = run_circuit(inst.A.terms[l].unitary, v0);
    const Statevector wlp = run_circuit(inst.A.terms[lp].unitary, v0);
    return inner_product(wlp, wl);
}

cplx gamma_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
                std::size_t lp) {
    validate_instance_circuit(inst, v);
    if (l >= inst.A.size() || lp >= inst.A.size()) fail("term index out of range");
    const Statevector v0 = run_circuit(v, zero_state(inst.A.n));
    const Statevector u0 = run_circuit(inst.b_prep, zero_state(inst.A.n));
    const cplx ml = inner_product(u0, run_circuit(inst.A.terms[l].unitary, v0));
    const cplx mlp = inner_product(u0, run_circuit(inst.A.terms[lp].unitary, v0));
    return ml * std::conj(mlp);
}

cplx delta_term(const QlspInstance& inst, const Circuit& v, std::size_t l,
                std::size_t lp, int j) {
    validate_instance_circuit(inst, v);
    if (l >= inst.A.size() || lp >= inst.A.size()) fail("term index out of range");
    if (j < 0 || j >= inst.A.n) fail("projector qubit out of range");
    const Statevector v0 = run_circuit(v, zero_state(inst.A.n));
    const Circuit u_dag = inst.b_prep.adjoint();
    const Statevector phil =
        run_circuit(u_dag, run_circuit(inst.A.terms[l].unitary, v0));
    const Statevector philp =
        run_circuit(u_dag, run_circuit(inst.A.terms[lp].unitary, v0));
    return delta_from_phi(philp, phil, j);
}

// --- Hadamard test -------------------------------------------------------------

double hadamard_test(const HadamardTestPlan& plan, Part part,
                     const ShotConfig& shots) {
    const int n = plan.state_prep.n;
    const int anc = n;
    Statevector state = zero_state(n + 1);
    apply_gate(state, Gate::h(anc));
    for (const Gate& g : plan.state_prep.gates) apply_gate(state, g);
    for (const Circuit& op : plan.controlled_ops) {
        if (op.n != n) fail("hadamard test operand register size mismatch");
        apply_controlled_circuit(state, op, anc);
    }
    if (part == Part::Imag) apply_gate(state, Gate::phase(anc, -1.5707963267948966));
    apply_gate(state, Gate::h(anc));

    const std::uint64_t abit = std::uint64_t{1} << anc;
    double p0 = 0.0;
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        if (!(i & abit)) p0 += std::norm(state[i]);
    }
    if (shots.exact_mode()) return 2.0 * p0 - 1.0;
    if (shots.shots_per_term == 0) fail("sampled mode needs shots_per_term >= 1");
    Rng rng(shots.seed);
    const std::uint64_t k = sample_binomial(rng, shots.shots_per_term,
                                            std::clamp(p0, 0.0, 1.0));
    return 2.0 * static_cast<double>(k) / static_cast<double>(shots.shots_per_term) - 1.0;
}

// --- Hadamard-Overlap test ------------------------------------------------------

OverlapEstimate overlap_test(const Circuit& u, const Circuit& v,
                             const Circuit& a_l, const Circuit& a_lp,
                             Part part, const ShotConfig& shots) {
    const int n = v.n;
    if (u.n != n || a_l.n != n || a_lp.n != n) {
        fail("overlap test operand register size mismatch");
    }
    const int total = 2 * n + 1;
    const int anc = 2 * n;
    Statevector state = zero_state(total);
    apply_gate(state, Gate::h(anc));
    for (const Gate& g : v.gates) apply_gate(state, g);                    // S1
    for (const Gate& g : u.shifted(total, n).gates) apply_gate(state, g);  // S2
    apply_controlled_circuit(state, a_l.shifted(total, 0), anc);
    apply_controlled_circuit(state, a_lp.adjoint().shifted(total, n), anc);
    if (part == Part::Imag) apply_gate(state, Gate::rz(anc, -1.5707963267948966));
    apply_gate(state, Gate::h(anc));
    // Transversal overlap readout between S1 and S2.
    for (int q = 0; q < n; ++q) {
        apply_gate(state, Gate::cnot(q, q + n));
        apply_gate(state, Gate::h(q));
    }

    // Outcome weight: (swap parity) * (-1)^{ancilla}.
    const std::uint64_t abit = std::uint64_t{1} << anc;
    auto outcome_sign = [&](std::uint64_t z) {
        const std::uint64_t s1 = z & ((std::uint64_t{1} << n) - 1);
        const std::uint64_t s2 = (z >> n) & ((std::uint64_t{1} << n) - 1);
        int sign = __builtin_popcountll(s1 & s2) & 1;
        if (z & abit) sign ^= 1;
        return sign ? -1.0 : 1.0;
    };

    OverlapEstimate est;
    if (shots.exact_mode()) {
        KahanSum acc;
        for (std::uint64_t z = 0; z < state.dim(); ++z) {
            acc.add(std::norm(state[z]) * outcome_sign(z));
        }
        est.value = acc.value();
        return est;
    }
    if (shots.shots_per_term == 0) fail("sampled mode needs shots_per_term >= 1");
    std::vector<double> cdf(state.dim());
    double running = 0.0;
    for (std::uint64_t z = 0; z < state.dim(); ++z) {
        running += std::norm(state[z]);
        cdf[z] = running;
    }
    Rng rng(shots.seed);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < shots.shots_per_term; ++s) {
        const double r = rng.uniform() * running;
        const std::uint64_t z = static_cast<std::uint64_t>(
            std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        const std::uint64_t zc = std::min<std::uint64_t>(z, state.dim() - 1);
        sum += outcome_sign(zc);
        if (!(zc & abit)) ++est.postselected_shots;
    }
    est.raw_shots = shots.shots_per_term;
    est.value = sum / static_cast<double>(shots.shots_per_term);
    return est;
}

cplx delta_via_overlap(const QlspInstance& inst, const Circuit& v,
                       std::size_t l, std::size_t lp, int j,
                       const ShotConfig& shots) {
    validate_instance_circuit(inst, v);
    if (l >= inst.A.size() || lp >= inst.A.size()) fail("term index out of range");
    const int n = inst.A.n;
    if (j < 0 || j >= n) fail("projector qubit out of range");
    // |0_j><0_j| x I = sum over bit-flip prefixes R applied before U.
    const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
    KahanSum re, im;
    std::uint64_t tag = 0;
    for (std::uint64_t r = 0; r < patterns; ++r) {
        Circuit prefixed(n);
        std::uint64_t bits = r;
        for (int q = 0; q < n; ++q) {
            if (q == j) continue;
            if (bits & 1) prefixed.add(Gate::x(q));
            bits >>= 1;
        }
        const Circuit u_r = prefixed.then(inst.b_prep);
        ShotConfig per = shots;
        per.seed = Rng(shots.seed).split(tag++).seed();
        re.add(overlap_test(u_r, v, inst.A.terms[l].unitary,
                            inst.A.terms[lp].unitary, Part::Real, per)
                   .value);
        per.seed = Rng(shots.seed).split(tag++).seed();
        im.add(overlap_test(u_r, v, inst.A.terms[l].unitary,
                            inst.A.terms[lp].unitary, Part::Imag, per)
                   .value);
    }
    return {re.value(), im.value()};
}

// --- Full evaluation -------------------------------------------------------------

namespace {

CostReport evaluate_direct(const QlspInstance& inst, const Circuit& v,
                           CostKind kind, const CostOptions& options) {
    const std::size_t L = inst.A.size();
    const int n = inst.A.n;
    TermCache cache = build_cache(inst, v, !is_global(kind), options.threads);

    CostReport report;
    report.kind = kind;
    report.beta.resize(L, L);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t lp = l; lp < L; ++lp) {
            const cplx b = inner_product(cache.w[lp], cache.w[l]);
            report.beta(l, lp) = b;
            report.beta(lp, l) = std::conj(b);
        }
    }
    report.psi_norm_sq = lcu_quadratic_sum(inst.A, report.beta);

    double secondary = 0.0;  // |<b|psi>|^2 or the local projector sum
    if (is_global(kind)) {
        std::vector<cplx> m(L);
        for (std::size_t l = 0; l < L; ++l) {
            m[l] = inner_product(cache.u0, cache.w[l]);
        }
        report.gamma.resize(L, L);
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t lp = 0; lp < L; ++lp) {
                report.gamma(l, lp) = m[l] * std::conj(m[lp]);
            }
        }
        secondary = lcu_quadratic_sum(inst.A, report.gamma);
    } else {
        report.delta.assign(static_cast<std::size_t>(n),
                            Eigen::MatrixXcd(L, L));
        parallel_for(static_cast<std::size_t>(n), options.threads,
                     [&](std::size_t j) {
                         auto& dj = report.delta[j];
                         for (std::size_t l = 0; l < L; ++l) {
                             for (std::size_t lp = l; lp < L; ++lp) {
                                 const cplx d = delta_from_phi(
                                     cache.phi[lp], cache.phi[l],
                                     static_cast<int>(j));
                                 dj(l, lp) = d;
                                 dj(lp, l) = std::conj(d);
                             }
                         }
                     });
        KahanSum acc;
        for (int j = 0; j < n; ++j) {
            acc.add(lcu_quadratic_sum(inst.A, report.delta[static_cast<std::size_t>(j)]));
        }
        secondary = acc.value() / static_cast<double>(n);
    }

    if (is_normalized(kind) && report.psi_norm_sq <= kSingularPsiTol) {
        throw std::runtime_error(
            "cost: <psi|psi> below 1e-14; A|x> is effectively singular");
    }
    switch (kind) {
        case CostKind::GlobalHat:
        case CostKind::LocalHat:
            report.value = clamp_roundoff(report.psi_norm_sq - secondary);
            break;
        case CostKind::Global:
        case CostKind::Local:
            report.value = clamp_roundoff(1.0 - secondary / report.psi_norm_sq);
            if (kind == CostKind::Global) report.value = std::min(report.value, 1.0);
            break;
    }
    return report;
}

CostReport evaluate_circuit_tests(const QlspInstance& inst, const Circuit& v,
                                  CostKind kind, const CostOptions& options) {
    const std::size_t L = inst.A.size();
    const int n = inst.A.n;
    const ShotConfig& shots = options.shots;
    const bool sampled = !shots.exact_mode();
    Rng stream(shots.seed);
    std::uint64_t tag = 0;
    auto next_cfg = [&]() {
        ShotConfig per = shots;
        per.seed = stream.split(tag++).seed();
        return per;
    };

    CostReport report;
    report.kind = kind;
    report.beta = Eigen::MatrixXcd::Zero(L, L);
    std::vector<Measured> measured;

    // beta_{ll'}: diagonal is A_l^dag A_l = 1 identically; off-diagonals come
    // from Hadamard tests on A_l then A_{l'}^dag.
    for (std::size_t l = 0; l < L; ++l) report.beta(l, l) = 1.0;
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t lp = l + 1; lp < L; ++lp) {
            HadamardTestPlan plan{v, {inst.A.terms[l].unitary,
                                      inst.A.terms[lp].unitary.adjoint()}};
            ShotConfig c1 = next_cfg(), c2 = next_cfg();
            const double re = hadamard_test(plan, Part::Real, c1);
            const double im = hadamard_test(plan, Part::Imag, c2);
            report.beta(l, lp) = {re, im};
            report.beta(lp, l) = {re, -im};
            if (sampled) {
                const cplx cc = inst.A.terms[l].coeff * std::conj(inst.A.terms[lp].coeff);
                report.shots_used += 2 * shots.shots_per_term;
                measured.push_back({estimator_variance(re, shots), 2.0 * cc.real(), 0.0, 0.0});
                measured.push_back({estimator_variance(im, shots), -2.0 * cc.imag(), 0.0, 0.0});
            }
        }
    }
    report.psi_norm_sq = lcu_quadratic_sum(inst.A, report.beta);

    double secondary = 0.0;
    if (is_global(kind)) {
        report.gamma = Eigen::MatrixXcd::Zero(L, L);
        // gamma_{ll}: all-zeros outcome probability of U^dag A_l V |0>.
        for (std::size_t l = 0; l < L; ++l) {
            const Circuit circ =
                v.then(inst.A.terms[l].unitary).then(inst.b_prep.adjoint());
            const Statevector out = run_circuit(circ, zero_state(n));
            double p = std::norm(out[0]);
            if (sampled) {
                ShotConfig c = next_cfg();
                Rng rng(c.seed);
                const std::uint64_t k =
                    sample_binomial(rng, c.shots_per_term, std::clamp(p, 0.0, 1.0));
                const double phat =
                    static_cast<double>(k) / static_cast<double>(c.shots_per_term);
                report.shots_used += c.shots_per_term;
                measured.push_back(
                    {std::max(phat * (1.0 - phat), 0.0) /
                         static_cast<double>(c.shots_per_term),
                     0.0, std::norm(inst.A.terms[l].coeff), 0.0});
                p = phat;
            }
            report.gamma(l, l) = p;
        }
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t lp = l + 1; lp < L; ++lp) {
                ShotConfig c1 = next_cfg(), c2 = next_cfg();
                const OverlapEstimate re =
                    overlap_test(inst.b_prep, v, inst.A.terms[l].unitary,
                                 inst.A.terms[lp].unitary, Part::Real, c1);
                const OverlapEstimate im =
                    overlap_test(inst.b_prep, v, inst.A.terms[l].unitary,
                                 inst.A.terms[lp].unitary, Part::Imag, c2);
                report.gamma(l, lp) = {re.value, im.value};
                report.gamma(lp, l) = {re.value, -im.value};
                report.overlap_raw_shots += re.raw_shots + im.raw_shots;
                report.overlap_postselected_shots +=
                    re.postselected_shots + im.postselected_shots;
                if (sampled) {
                    const cplx cc =
                        inst.A.terms[l].coeff * std::conj(inst.A.terms[lp].coeff);
                    report.shots_used += 2 * shots.shots_per_term;
                    measured.push_back(
                        {estimator_variance(re.value, shots), 0.0, 2.0 * cc.real(), 0.0});
                    measured.push_back(
                        {estimator_variance(im.value, shots), 0.0, -2.0 * cc.imag(), 0.0});
                }
            }
        }
        secondary = lcu_quadratic_sum(inst.A, report.gamma);
    } else {
        report.delta.assign(static_cast<std::size_t>(n),
                            Eigen::MatrixXcd::Zero(L, L));
        const double local_weight = 1.0 / (2.0 * n);
        for (int j = 0; j < n; ++j) {
            auto& dj = report.delta[static_cast<std::size_t>(j)];
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t lp = l; lp < L; ++lp) {
                    cplx d;
                    if (options.delta_route == DeltaRoute::OverlapAverage) {
                        ShotConfig c = next_cfg();
                        d = delta_via_overlap(inst, v, l, lp, j, c);
                        if (sampled) {
                            report.shots_used += 2 * shots.shots_per_term
                                                 << (n - 1);
                        }
                    } else {
                        // delta = (beta + zeta_Z)/2 with zeta_Z the Z_j matrix
                        // element between U^dag A_l V and U^dag A_{l'} V.
                        HadamardTestPlan plan{
                            v,
                            {inst.A.terms[l].unitary, inst.b_prep.adjoint(),
                             pauli_word_circuit(n, std::string(static_cast<std::size_t>(j), 'I') + "Z"),
                             inst.b_prep, inst.A.terms[lp].unitary.adjoint()}};
                        ShotConfig c1 = next_cfg(), c2 = next_cfg();
                        const double zre = hadamard_test(plan, Part::Real, c1);
                        const double zim = hadamard_test(plan, Part::Imag, c2);
                        const cplx zeta{zre, zim};
                        d = (report.beta(l, lp) + zeta) / 2.0;
                        if (sampled) {
                            const cplx cc = inst.A.terms[l].coeff *
                                            std::conj(inst.A.terms[lp].coeff);
                            const double mirror = (l == lp) ? 1.0 : 2.0;
                            report.shots_used += 2 * shots.shots_per_term;
                            measured.push_back({estimator_variance(zre, shots), 0.0,
                                                0.0, mirror * cc.real() * local_weight});
                            measured.push_back({estimator_variance(zim, shots), 0.0,
                                                0.0, -mirror * cc.imag() * local_weight});
                        }
                    }
                    dj(l, lp) = d;
                    dj(lp, l) = std::conj(d);
                }
            }
        }
        KahanSum acc;
        for (int j = 0; j < n; ++j) {
            acc.add(lcu_quadratic_sum(inst.A, report.delta[static_cast<std::size_t>(j)]));
        }
        secondary = acc.value() / static_cast<double>(n);
        // Through the split route, every beta measurement also feeds the local
        // sum with half of its psi^2 weight.
        if (sampled && options.delta_route == DeltaRoute::HadamardSplit) {
            for (Measured& m : measured) {
                if (m.w_psi != 0.0) m.w_local = 0.5 * m.w_psi;
            }
        }
    }

    if (is_normalized(kind) && report.psi_norm_sq <= kSingularPsiTol) {
        throw std::runtime_error(
            "cost: <psi|psi> below 1e-14; A|x> is effectively singular");
    }
    const double p = report.psi_norm_sq;
    double fp = 0.0, fb = 0.0, fl = 0.0;
    switch (kind) {
        case CostKind::GlobalHat:
            report.value = p - secondary;
            fp = 1.0; fb = -1.0;
            break;
        case CostKind::LocalHat:
            report.value = p - secondary;
            fp = 1.0; fl = -1.0;
            break;
        case CostKind::Global:
            report.value = 1.0 - secondary / p;
            fp = secondary / (p * p); fb = -1.0 / p;
            break;
        case CostKind::Local:
            report.value = 1.0 - secondary / p;
            fp = secondary / (p * p); fl = -1.0 / p;
            break;
    }
    if (!sampled) {
        report.value = clamp_roundoff(report.value);
        if (kind == CostKind::Global) report.value = std::min(report.value, 1.0);
    } else {
        double var = 0.0;
        for (const Measured& m : measured) {
            const double w = fp * m.w_psi + fb * m.w_bpsi + fl * m.w_local;
            var += w * w * m.variance;
        }
        report.value_stderr = std::sqrt(var);
    }
    return report;
}

}  // namespace

CostReport evaluate_cost(const QlspInstance& inst, const Circuit& v,
                         CostKind kind, const CostOptions& options) {
    validate_instance_circuit(inst, v);
    if (options.backend == CostBackend::Direct) {
        if (!options.shots.exact_mode()) {
            fail("sampled mode needs the circuit-test backend");
        }
        return evaluate_direct(inst, v, kind, options);
    }
    return evaluate_circuit_tests(inst, v, kind, options);
}

Eigen::MatrixXcd effective_hamiltonian(const QlspInstance& inst, CostKind kind) {
    const int n = inst.A.n;
    if (n > 12) fail("effective_hamiltonian capped at 12 qubits");
    const Eigen::MatrixXcd a = assemble_dense(inst.A);
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd projector;
    if (is_global(kind)) {
        const Eigen::VectorXcd b = inst.b_state().to_eigen();
        projector = Eigen::MatrixXcd::Identity(dim, dim) - b * b.adjoint();
    } else {
        Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(dim, dim);
        for (int j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < dim; ++i) {
                if (!(i & (std::size_t{1} << j))) {
                    avg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += 1.0;
                }
            }
        }
        const Eigen::MatrixXcd u = circuit_unitary(inst.b_prep);
        projector = Eigen::MatrixXcd::Identity(dim, dim) -
                    u * (avg / static_cast<double>(n)) * u.adjoint();
    }
    Eigen::MatrixXcd h = a.adjoint() * projector * a;
    return 0.5 * (h + Eigen::MatrixXcd(h.adjoint()));
}

// --- Choi identity ---------------------------------------------------------------

Circuit maximally_entangling_circuit(int n) {
    Circuit e(2 * n);
    for (int q = 0; q < n; ++q) e.add(Gate::h(q));
    for (int q = 0; q < n; ++q) e.add(Gate::cnot(q, q + n));
    return e;
}

ChoiIdentityResult choi_cost_identity_check(const Circuit& u_tilde,
                                            const Circuit& v_tilde) {
    const int n = u_tilde.n;
    if (v_tilde.n != n) fail("choi check needs same-size circuits");
    if (n > 6) fail("choi check capped at 6 qubits (2n-qubit states)");
    const Circuit e = maximally_entangling_circuit(n);
    QlspInstance inst;
    inst.A.n = 2 * n;
    inst.A.terms.push_back(pauli_term(2 * n, 1.0, std::string(static_cast<std::size_t>(2 * n), 'I')));
    inst.b_prep = e.then(u_tilde.shifted(2 * n, 0));
    inst.label = "choi";
    const Circuit v_full = e.then(v_tilde.shifted(2 * n, 0));

    ChoiIdentityResult result;
    result.cost = evaluate_cost(inst, v_full, CostKind::Global).value;
    const Eigen::MatrixXcd uu = circuit_unitary(u_tilde);
    const Eigen::MatrixXcd vv = circuit_unitary(v_tilde);
    const cplx tr = (vv.adjoint() * uu).trace();
    const double d = static_cast<double>(Eigen::Index{1} << n);
    result.trace_magnitude = std::norm(tr) / (d * d);
    return result;
}

}  // namespace vqls

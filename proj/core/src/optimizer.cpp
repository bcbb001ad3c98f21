#include "vqls/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vqls/gradient.hpp"
#include "vqls/rng.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("optimizer: " + msg);
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2
constexpr double kGrowthAcceptRel = 1e-3;

struct StopSignal {
    TerminationCause cause;
};

// Evaluation bookkeeping shared by every method: counts evaluations, records
// improvements, checks the certified threshold on every evaluated point and
// the budget before every evaluation after the first.
class Driver {
  public:
    Driver(const QlspInstance& inst, Ansatz ansatz, CostKind kind,
           const TerminationRule& rule, const MinimizeOptions& options)
        : inst_(&inst),
          ansatz_(std::move(ansatz)),
          kind_(kind),
          rule_(rule),
          options_(options),
          start_(std::chrono::steady_clock::now()) {
        if (rule.kind != kind) fail("termination rule kind differs from cost kind");
        if (rule.n != inst.A.n) fail("termination rule register size mismatch");
        trace_.method = "?";
        best_cost_ = std::numeric_limits<double>::infinity();
    }

    const Ansatz& ansatz() const { return ansatz_; }
    std::size_t num_parameters() const { return ansatz_.num_parameters(); }
    std::uint64_t evaluations() const { return trace_.evaluations; }
    double best_cost() const { return best_cost_; }

    // Replaces the working structure (variable-structure outer loop).
    void set_ansatz(Ansatz a) { ansatz_ = std::move(a); }

    double eval(std::span<const double> alpha) {
        precharge(1);
        CostOptions co;
        co.threads = options_.threads;
        const CostReport r = evaluate_cost(*inst_, ansatz_.bind(alpha), kind_, co);
        ++trace_.evaluations;
        note_point(alpha, r.value, r.psi_norm_sq);
        return r.value;
    }

    // Budget charge for evaluations done outside eval() (gradient circuits).
    void precharge(std::uint64_t k) {
        if (trace_.evaluations > 0 &&
            trace_.evaluations + k > rule_.max_evaluations) {
            throw StopSignal{TerminationCause::Budget};
        }
    }
    void charge(std::uint64_t k) { trace_.evaluations += k; }

    void log_growth(bool accepted, std::size_t gates_after) {
        trace_.growth_events.push_back({trace_.evaluations, accepted, gates_after});
    }

    // Called by the top-level driver after the very first evaluation.
    void check_budget_after_initial() {
        if (trace_.evaluations >= rule_.max_evaluations) {
            throw StopSignal{TerminationCause::Budget};
        }
    }

    OptimizerTrace finish(TerminationCause cause) {
        trace_.terminated_by = cause;
        if (cause == TerminationCause::Threshold) {
            trace_.final_alpha = threshold_alpha_;
            trace_.final_ansatz = threshold_ansatz_;
            trace_.final_cost = threshold_cost_;
            trace_.final_psi_norm_sq = threshold_psi_;
        } else {
            trace_.final_alpha = best_alpha_;
            trace_.final_ansatz = best_ansatz_;
            trace_.final_cost = best_cost_;
            trace_.final_psi_norm_sq = best_psi_;
        }
        return std::move(trace_);
    }

  private:
    void note_point(std::span<const double> alpha, double cost, double psi) {
        if (cost < best_cost_) {
            best_cost_ = cost;
            best_psi_ = psi;
            best_alpha_.assign(alpha.begin(), alpha.end());
            best_ansatz_ = ansatz_;
            TraceEntry entry{trace_.evaluations, cost, psi, elapsed_ms()};
            trace_.history.push_back(entry);
            if (options_.observer) {
                options_.observer(
                    {trace_.evaluations, cost, psi, alpha, &ansatz_});
            }
        }
        const double gamma = termination_threshold(rule_, psi);
        if (cost <= gamma) {
            threshold_alpha_.assign(alpha.begin(), alpha.end());
            threshold_ansatz_ = ansatz_;
            threshold_cost_ = cost;
            threshold_psi_ = psi;
            throw StopSignal{TerminationCause::Threshold};
        }
    }

    double elapsed_ms() const {
        if (options_.deterministic_timing) return 0.0;
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

    const QlspInstance* inst_;
    Ansatz ansatz_;
    CostKind kind_;
    TerminationRule rule_;
    MinimizeOptions options_;
    std::chrono::steady_clock::time_point start_;
    OptimizerTrace trace_;
    std::vector<double> best_alpha_;
    Ansatz best_ansatz_;
    double best_cost_ = 0.0;
    double best_psi_ = 0.0;
    std::vector<double> threshold_alpha_;
    Ansatz threshold_ansatz_;
    double threshold_cost_ = 0.0;
    double threshold_psi_ = 0.0;
};

std::vector<double> random_angles(std::size_t count, Rng& rng) {
    std::vector<double> out(count);
    for (double& v : out) v = rng.uniform(-kPi, kPi);
    return out;
}

struct LinePoint {
    double s = 0.0;
    double f = std::numeric_limits<double>::infinity();
};

// Golden-section refinement over [lo, hi], tracking the best point seen.
void golden_section(const std::function<double(double)>& g, double lo, double hi,
                    int budget, LinePoint& best) {
    if (lo > hi) std::swap(lo, hi);
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    if (budget < 2) return;
    double f1 = g(x1), f2 = g(x2);
    budget -= 2;
    if (f1 < best.f) best = {x1, f1};
    if (f2 < best.f) best = {x2, f2};
    while (budget > 0 && std::abs(hi - lo) > 1e-12) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = g(x1);
            if (f1 < best.f) best = {x1, f1};
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = g(x2);
            if (f2 < best.f) best = {x2, f2};
        }
        --budget;
    }
}

// Doubling bracket around s = 0 followed by golden-section refinement.
// g(0) = f0 is assumed already evaluated and is not re-evaluated.
LinePoint line_minimize(const std::function<double(double)>& g, double f0,
                        double step, int budget) {
    LinePoint best{0.0, f0};
    if (budget <= 1) return best;
    int used = 0;
    auto gc = [&](double s) {
        ++used;
        const double v = g(s);
        if (v < best.f) best = {s, v};
        return v;
    };
    double f1 = gc(step);
    double direction = 1.0;
    if (f1 >= f0) {
        const double f1n = gc(-step);
        if (f1n < f0) {
            direction = -1.0;
            f1 = f1n;
        } else {
            // No downhill step found; refine inside [-step, step].
            golden_section(gc, -step, step, budget - used, best);
            return best;
        }
    }
    // Double until the function turns back up.
    double s_prev = 0.0;
    double s_cur = step, f_cur = f1;
    while (used < budget - 2) {
        const double s_next = s_cur * 2.0;
        const double f_next = gc(direction * s_next);
        if (f_next >= f_cur) {
            golden_section(gc, direction * s_prev, direction * s_next,
                           budget - used, best);
            return best;
        }
        s_prev = s_cur;
        s_cur = s_next;
        f_cur = f_next;
    }
    return best;
}

// --- Methods -----------------------------------------------------------------

void run_random_line_search(Driver& d, std::vector<double>& x, double& f_cur,
                            Rng& rng, const MinimizeOptions& options) {
    const std::size_t p = x.size();
    int failures = 0;
    while (true) {
        std::vector<double> w(p);
        double nrm = 0.0;
        for (double& v : w) {
            v = rng.normal();
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        if (nrm <= 0.0) continue;
        for (double& v : w) v /= nrm;
        auto g = [&](double s) {
            std::vector<double> cand = x;
            for (std::size_t i = 0; i < p; ++i) cand[i] += s * w[i];
            return d.eval(cand);
        };
        const LinePoint best = line_minimize(g, f_cur, 0.25, options.line_search_evals);
        if (best.f < f_cur) {
            for (std::size_t i = 0; i < p; ++i) x[i] += best.s * w[i];
            f_cur = best.f;
            failures = 0;
        } else if (++failures >= 200) {
            // Stuck in a flat region or local minimum: restart the working
            // point (the best iterate so far is kept by the driver).
            x = random_angles(p, rng);
            f_cur = d.eval(x);
            failures = 0;
        }
    }
}

void run_coordinate(Driver& d, std::vector<double>& x, double& f_cur, Rng& rng,
                    const MinimizeOptions& options) {
    while (true) {
        const double f_pass_start = f_cur;
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto g = [&](double t) {
                std::vector<double> cand = x;
                cand[i] = t;
                return d.eval(cand);
            };
            LinePoint best{x[i], f_cur};
            golden_section(g, x[i] - kPi, x[i] + kPi, options.line_search_evals, best);
            if (best.f < f_cur) {
                x[i] = best.s;
                f_cur = best.f;
            }
        }
        if (f_pass_start - f_cur <=
            1e-12 * (std::abs(f_pass_start) + std::abs(f_cur)) + 1e-15) {
            x = random_angles(x.size(), rng);
            f_cur = d.eval(x);
        }
    }
}

void run_gradient_descent(Driver& d, const QlspInstance& inst, CostKind kind,
                          std::vector<double>& x, double& f_cur, Rng& rng,
                          const MinimizeOptions& options) {
    GradientOptions gopts;
    gopts.allow_fd_fallback = true;
    gopts.threads = options.threads;
    const std::size_t p = x.size();
    while (true) {
        // A parameter-shift (or fallback) gradient costs 2 evaluations per
        // parameter plus the base point.
        d.precharge(2 * p + 1);
        const GradientVector g = analytic_gradient(inst, d.ansatz(), x, kind, gopts);
        d.charge(2 * p + 1);
        if (g.max_abs() <= 1e-14) {
            x = random_angles(p, rng);
            f_cur = d.eval(x);
            continue;
        }
        double step = options.gradient_step;
        bool moved = false;
        while (step >= 1e-14) {
            std::vector<double> cand = x;
            for (std::size_t i = 0; i < p; ++i) cand[i] -= step * g.values[i];
            const double f_cand = d.eval(cand);
            if (f_cand < f_cur) {
                x = std::move(cand);
                f_cur = f_cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            x = random_angles(p, rng);
            f_cur = d.eval(x);
        }
    }
}

void run_powell(Driver& d, std::vector<double>& x, double& f_cur, Rng& rng,
                const MinimizeOptions& options) {
    const std::size_t p = x.size();
    std::vector<std::vector<double>> dirs(p, std::vector<double>(p, 0.0));
    auto reset_dirs = [&] {
        for (std::size_t i = 0; i < p; ++i) {
            std::fill(dirs[i].begin(), dirs[i].end(), 0.0);
            dirs[i][i] = 1.0;
        }
    };
    reset_dirs();
    auto line_along = [&](const std::vector<double>& dir, double f0) {
        auto g = [&](double s) {
            std::vector<double> cand = x;
            for (std::size_t i = 0; i < p; ++i) cand[i] += s * dir[i];
            return d.eval(cand);
        };
        const LinePoint best = line_minimize(g, f0, 0.25, options.line_search_evals);
        if (best.f < f0) {
            for (std::size_t i = 0; i < p; ++i) x[i] += best.s * dir[i];
        }
        return std::min(best.f, f0);
    };
    while (true) {
        const std::vector<double> x_start = x;
        const double f_start = f_cur;
        double biggest_drop = 0.0;
        std::size_t drop_index = 0;
        for (std::size_t i = 0; i < p; ++i) {
            const double f_before = f_cur;
            f_cur = line_along(dirs[i], f_cur);
            if (f_before - f_cur > biggest_drop) {
                biggest_drop = f_before - f_cur;
                drop_index = i;
            }
        }
        if (f_start - f_cur <=
            1e-12 * (std::abs(f_start) + std::abs(f_cur)) + 1e-15) {
            x = random_angles(p, rng);
            f_cur = d.eval(x);
            reset_dirs();
            continue;
        }
        // Direction replacement with the classic extrapolation test.
        std::vector<double> extrapolated(p), net(p);
        double net_norm = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            net[i] = x[i] - x_start[i];
            extrapolated[i] = x[i] + net[i];
            net_norm += net[i] * net[i];
        }
        if (net_norm <= 0.0) continue;
        const double f_extrap = d.eval(extrapolated);
        if (f_extrap < f_start) {
            const double t = 2.0 * (f_start - 2.0 * f_cur + f_extrap) *
                                 (f_start - f_cur - biggest_drop) *
                                 (f_start - f_cur - biggest_drop) -
                             biggest_drop * (f_start - f_extrap) * (f_start - f_extrap);
            if (t < 0.0) {
                f_cur = line_along(net, f_cur);
                dirs[drop_index] = net;
            }
        }
    }
}

// Inner loop for the variable-structure optimizer: Powell-style passes
// (sequential line minimization with direction replacement, which avoids the
// coordinate-descent zigzag on coupled parameters) until the per-pass
// relative improvement drops below the growth-acceptance threshold. Returns
// the working cost.
double variable_inner_loop(Driver& d, std::vector<double>& x, double f_cur,
                           const MinimizeOptions& options) {
    const std::size_t p = x.size();
    std::vector<std::vector<double>> dirs(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) dirs[i][i] = 1.0;
    while (true) {
        const double f_pass_start = f_cur;
        const std::vector<double> x_start = x;
        double biggest_drop = 0.0;
        std::size_t drop_index = 0;
        for (std::size_t i = 0; i < p; ++i) {
            auto g = [&](double s) {
                std::vector<double> cand = x;
                for (std::size_t k = 0; k < p; ++k) cand[k] += s * dirs[i][k];
                return d.eval(cand);
            };
            const LinePoint best = line_minimize(g, f_cur, 0.25, options.line_search_evals);
            if (best.f < f_cur) {
                for (std::size_t k = 0; k < p; ++k) x[k] += best.s * dirs[i][k];
                if (f_cur - best.f > biggest_drop) {
                    biggest_drop = f_cur - best.f;
                    drop_index = i;
                }
                f_cur = best.f;
            }
        }
        std::vector<double> net(p);
        double net_norm = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            net[k] = x[k] - x_start[k];
            net_norm += net[k] * net[k];
        }
        if (net_norm > 0.0) {
            auto g = [&](double s) {
                std::vector<double> cand = x;
                for (std::size_t k = 0; k < p; ++k) cand[k] += s * net[k];
                return d.eval(cand);
            };
            const LinePoint best = line_minimize(g, f_cur, 1.0, options.line_search_evals);
            if (best.f < f_cur) {
                for (std::size_t k = 0; k < p; ++k) x[k] += best.s * net[k];
                f_cur = best.f;
                dirs[drop_index] = net;
            }
        }
        if (f_pass_start - f_cur <= kGrowthAcceptRel * std::abs(f_pass_start)) {
            return f_cur;
        }
    }
}

}  // namespace

std::string to_string(OptimizerMethod m) {
    switch (m) {
        case OptimizerMethod::RandomLineSearch: return "random_line_search";
        case OptimizerMethod::Coordinate: return "coordinate";
        case OptimizerMethod::GradientDescent: return "gradient_descent";
        case OptimizerMethod::Powell: return "powell";
    }
    return "?";
}

OptimizerMethod optimizer_method_from_string(const std::string& s) {
    if (s == "random_line_search") return OptimizerMethod::RandomLineSearch;
    if (s == "coordinate") return OptimizerMethod::Coordinate;
    if (s == "gradient_descent") return OptimizerMethod::GradientDescent;
    if (s == "powell") return OptimizerMethod::Powell;
    fail("unknown optimizer method '" + s + "'");
}

double termination_threshold(const TerminationRule& rule, double psi_norm_sq) {
    if (rule.kappa <= 1.0) fail("termination threshold needs kappa > 1");
    if (rule.target_epsilon <= 0.0 || rule.target_epsilon >= 1.0) {
        fail("target epsilon must lie in (0, 1)");
    }
    double gamma = rule.target_epsilon * rule.target_epsilon /
                   (rule.kappa * rule.kappa);
    if (!is_global(rule.kind)) {
        if (rule.n < 1) fail("termination threshold needs n >= 1");
        gamma /= static_cast<double>(rule.n);
    }
    if (rule.use_tightened && is_normalized(rule.kind)) {
        if (psi_norm_sq <= 0.0) fail("tightened threshold needs <psi|psi> > 0");
        gamma /= psi_norm_sq;
    }
    return gamma;
}

OptimizerTrace minimize(const QlspInstance& inst, const Ansatz& ansatz,
                        CostKind kind, OptimizerMethod method,
                        const TerminationRule& rule, std::uint64_t seed,
                        const MinimizeOptions& options) {
    Driver driver(inst, ansatz, kind, rule, options);
    Rng rng = Rng(seed).split(0x6f7074);  // optimizer stream
    std::vector<double> x = options.randomize_initial
                                ? random_angles(ansatz.num_parameters(), rng)
                                : ansatz.parameters;
    if (x.size() != ansatz.num_parameters()) fail("initial parameter size mismatch");

    TerminationCause cause = TerminationCause::Budget;
    try {
        double f_cur = driver.eval(x);
        driver.check_budget_after_initial();
        switch (method) {
            case OptimizerMethod::RandomLineSearch:
                run_random_line_search(driver, x, f_cur, rng, options);
                break;
            case OptimizerMethod::Coordinate:
                run_coordinate(driver, x, f_cur, rng, options);
                break;
            case OptimizerMethod::GradientDescent:
                run_gradient_descent(driver, inst, kind, x, f_cur, rng, options);
                break;
            case OptimizerMethod::Powell:
                run_powell(driver, x, f_cur, rng, options);
                break;
        }
    } catch (const StopSignal& stop) {
        cause = stop.cause;
    }
    OptimizerTrace trace = driver.finish(cause);
    trace.method = to_string(method);
    return trace;
}

OptimizerTrace minimize_variable(const QlspInstance& inst, const Ansatz& ansatz,
                                 CostKind kind, const TerminationRule& rule,
                                 std::uint64_t seed,
                                 const MinimizeOptions& options) {
    if (ansatz.family != AnsatzFamily::Variable) {
        fail("minimize_variable needs a variable-structure ansatz");
    }
    Driver driver(inst, ansatz, kind, rule, options);
    Rng rng = Rng(seed).split(0x766172);  // variable-structure stream
    std::vector<double> x = options.randomize_initial
                                ? random_angles(ansatz.num_parameters(), rng)
                                : ansatz.parameters;

    TerminationCause cause = TerminationCause::Budget;
    try {
        double f_cur = driver.eval(x);
        driver.check_budget_after_initial();
        f_cur = variable_inner_loop(driver, x, f_cur, options);
        int consecutive_rejects = 0;
        while (true) {
            const Ansatz snapshot_ansatz = driver.ansatz();
            const std::vector<double> snapshot_x = x;
            const double snapshot_f = f_cur;

            Ansatz grown = grow_variable(driver.ansatz(), rng.next_u64());
            const std::size_t grown_params = grown.num_parameters();
            driver.set_ansatz(std::move(grown));
            x.resize(grown_params, 0.0);  // inserted angles start at identity

            f_cur = variable_inner_loop(driver, x, f_cur, options);
            const bool accept = f_cur <= snapshot_f * (1.0 - kGrowthAcceptRel);
            if (accept) {
                driver.log_growth(true, driver.ansatz().num_gates());
                consecutive_rejects = 0;
            } else {
                driver.set_ansatz(snapshot_ansatz);
                x = snapshot_x;
                f_cur = snapshot_f;
                driver.log_growth(false, snapshot_ansatz.num_gates());
                ++consecutive_rejects;
            }
            if (consecutive_rejects >= 6) {
                // Stuck at a local minimum this structure cannot leave:
                // redraw the working angles (the best iterate is kept by the
                // driver) and descend again.
                x = random_angles(x.size(), rng);
                f_cur = driver.eval(x);
                f_cur = variable_inner_loop(driver, x, f_cur, options);
                consecutive_rejects = 0;
            }
        }
    } catch (const StopSignal& stop) {
        cause = stop.cause;
    }
    OptimizerTrace trace = driver.finish(cause);
    trace.method = "variable";
    return trace;
}

TtsResult time_to_solution(
    const std::function<QlspInstance(int)>& family,
    const std::function<Ansatz(const QlspInstance&)>& make_ansatz, CostKind kind,
    OptimizerMethod method, const TerminationRule& rule,
    const TtsProtocol& protocol, std::uint64_t seed,
    const MinimizeOptions& options) {
    if (protocol.runs_per_instance < 1 || protocol.instances < 1 ||
        protocol.best_of < 1) {
        fail("protocol counts must be >= 1");
    }
    if (protocol.runs_per_instance % protocol.best_of != 0) {
        fail("runs_per_instance must be a multiple of best_of");
    }
    TtsResult result;
    double sum = 0.0;
    Rng rng(seed);
    for (int m = 0; m < protocol.instances; ++m) {
        const QlspInstance inst = family(m);
        TerminationRule r = rule;
        r.n = inst.A.n;
        if (inst.kappa) r.kappa = *inst.kappa;
        const Ansatz a = make_ansatz(inst);
        int run = 0;
        const int groups = protocol.runs_per_instance / protocol.best_of;
        for (int grp = 0; grp < groups; ++grp) {
            std::uint64_t best = 0;
            bool all_resolved = true;
            bool any = false;
            for (int k = 0; k < protocol.best_of; ++k, ++run) {
                const std::uint64_t run_seed =
                    rng.split(static_cast<std::uint64_t>(m) * 1000003 +
                              static_cast<std::uint64_t>(run))
                        .seed();
                const OptimizerTrace trace =
                    (a.family == AnsatzFamily::Variable)
                        ? minimize_variable(inst, a, kind, r, run_seed, options)
                        : minimize(inst, a, kind, method, r, run_seed, options);
                if (trace.terminated_by != TerminationCause::Threshold) {
                    all_resolved = false;
                    continue;
                }
                if (!any || trace.evaluations < best) best = trace.evaluations;
                any = true;
            }
            if (all_resolved && any) {
                sum += static_cast<double>(best);
                ++result.resolved_groups;
            } else {
                ++result.unresolved_groups;
            }
        }
    }
    if (result.resolved_groups > 0) {
        result.time_to_solution = sum / static_cast<double>(result.resolved_groups);
    }
    return result;
}

}  // namespace vqls

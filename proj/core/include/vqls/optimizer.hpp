#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"
#include "vqls/problem.hpp"

namespace vqls {

enum class OptimizerMethod { RandomLineSearch, Coordinate, GradientDescent, Powell };
std::string to_string(OptimizerMethod m);
OptimizerMethod optimizer_method_from_string(const std::string& s);

// Certified stopping rule: optimization may stop once the cost is at or below
// gamma, which guarantees a trace distance to the exact solution of at most
// target_epsilon. gamma = eps^2/kappa^2 for the global kinds and
// eps^2/(n kappa^2) for the local kinds; with use_tightened the normalized
// kinds divide by the current <psi|psi>.
struct TerminationRule {
    double target_epsilon = 0.01;
    CostKind kind = CostKind::Local;
    double kappa = 0.0;
    int n = 0;
    bool use_tightened = false;
    std::uint64_t max_evaluations = 200000;
};

double termination_threshold(const TerminationRule& rule, double psi_norm_sq);

enum class TerminationCause { Threshold, Budget };

struct TraceEntry {
    std::uint64_t evaluation = 0;  // total cost evaluations so far
    double cost = 0.0;
    double psi_norm_sq = 0.0;
    double wallclock_ms = 0.0;  // 0 under deterministic timing
};

struct GrowthEvent {
    std::uint64_t evaluation = 0;
    bool accepted = false;
    std::size_t gates_after = 0;
};

struct OptimizerTrace {
    std::string method;
    std::uint64_t evaluations = 0;
    std::vector<TraceEntry> history;  // accepted iterates, nonincreasing cost
    std::vector<double> final_alpha;
    Ansatz final_ansatz;  // structure that final_alpha binds (variable runs grow it)
    TerminationCause terminated_by = TerminationCause::Budget;
    double final_cost = 0.0;
    double final_psi_norm_sq = 0.0;
    std::vector<GrowthEvent> growth_events;
};

// Called whenever an accepted iterate is recorded.
struct ObserverEvent {
    std::uint64_t evaluation;
    double cost;
    double psi_norm_sq;
    std::span<const double> alpha;
    const Ansatz* ansatz;
};
using Observer = std::function<void(const ObserverEvent&)>;

struct MinimizeOptions {
    int threads = 1;
    bool randomize_initial = true;  // alpha ~ U[-pi, pi) from the seed
    int line_search_evals = 32;     // per-line budget, bracketing included
    double gradient_step = 0.1;     // initial step, halved on rejection
    bool deterministic_timing = true;  // write 0 wallclock in trace rows
    Observer observer;
};

// Minimizes the chosen cost over the ansatz parameters until the certified
// threshold or the evaluation budget is reached. Every exact cost evaluation
// is counted; budget exhaustion is reported through terminated_by, not thrown.
OptimizerTrace minimize(const QlspInstance& inst, const Ansatz& ansatz,
                        CostKind kind, OptimizerMethod method,
                        const TerminationRule& rule, std::uint64_t seed,
                        const MinimizeOptions& options = {});

// Variable-structure optimization: alternates coordinate-descent inner loops
// with identity-block growth; an insertion is kept only when the following
// inner loop improves the cost by a relative 1e-3, and is reverted exactly
// otherwise.
OptimizerTrace minimize_variable(const QlspInstance& inst, const Ansatz& ansatz,
                                 CostKind kind, const TerminationRule& rule,
                                 std::uint64_t seed,
                                 const MinimizeOptions& options = {});

// Time-to-solution protocol: per instance, runs_per_instance runs are grouped
// into runs_per_instance/best_of groups, each group contributes the smallest
// evaluation count among its runs, and the result is the mean over all groups
// of all instances. A group containing any run that failed to reach the
// threshold is excluded and counted in unresolved_groups.
struct TtsProtocol {
    int runs_per_instance = 1;
    int instances = 1;
    int best_of = 1;
};

struct TtsResult {
    double time_to_solution = 0.0;
    int resolved_groups = 0;
    int unresolved_groups = 0;
};

TtsResult time_to_solution(
    const std::function<QlspInstance(int)>& family,
    const std::function<Ansatz(const QlspInstance&)>& make_ansatz, CostKind kind,
    OptimizerMethod method, const TerminationRule& rule,
    const TtsProtocol& protocol, std::uint64_t seed,
    const MinimizeOptions& options = {});

}  // namespace vqls

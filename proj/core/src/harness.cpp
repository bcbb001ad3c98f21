#include "vqls/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "vqls/certify.hpp"
#include "vqls/rng.hpp"
#include "vqls/serialize.hpp"
#include "vqls/stats.hpp"

namespace vqls {

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace

QlspInstance ProblemSpec::build() const {
    if (file) return load_problem(*file);
    if (family == "ising") return ising_qlsp(n, coupling, kappa);
    if (family == "random") return random_qlsp(n, kappa, pair_probability, seed);
    if (family == "degenerate") return degenerate_qlsp(variant, kappa);
    throw ConfigError("unknown problem family '" + family + "'");
}

Ansatz AnsatzSpec::build(const QlspInstance& inst) const {
    if (family == "hea") return build_hea(inst.A.n, layers, extended_alphabet);
    if (family == "qaoa") {
        QaoaSpec spec;
        spec.rounds = rounds;
        spec.driver = cost_kind_from_string(driver);
        spec.driver_scale = driver_scale;
        return build_qaoa(inst, spec);
    }
    if (family == "product") return build_product(inst.A.n);
    if (family == "variable") {
        Rng rng(seed);
        return random_variable_ansatz(inst.A.n, blocks, rng, extended_alphabet);
    }
    throw ConfigError("unknown ansatz family '" + family + "'");
}

// --- solve ---------------------------------------------------------------------

int run_solve(const SolveConfig& config) {
    QlspInstance inst;
    Ansatz ansatz;
    TerminationRule rule;
    try {
        inst = config.problem.build();
        ansatz = config.ansatz.build(inst);
        rule.target_epsilon = config.epsilon;
        rule.kind = config.kind;
        rule.n = inst.A.n;
        rule.use_tightened = config.tightened;
        rule.max_evaluations = config.max_evaluations;
        rule.kappa = inst.kappa ? *inst.kappa : estimate_kappa_dense(inst.A);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    OptimizerTrace trace;
    try {
        MinimizeOptions options;
        options.threads = config.threads;
        options.deterministic_timing = (config.threads <= 1);
        if (config.ansatz.family == "variable") {
            trace = minimize_variable(inst, ansatz, config.kind, rule,
                                      config.seed, options);
        } else {
            trace = minimize(inst, ansatz, config.kind, config.method, rule,
                             config.seed, options);
        }
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    try {
        if (config.trace_path) write_trace_csv(*config.trace_path, trace, rule);
        const Circuit solution = trace.final_ansatz.bind(trace.final_alpha);
        CostReport report;
        report.kind = config.kind;
        report.value = trace.final_cost;
        report.psi_norm_sq = trace.final_psi_norm_sq;
        const Certificate cert =
            make_certificate(inst, report, solution, config.observables);
        if (config.certificate_path) save_certificate(*config.certificate_path, cert);
        if (!config.quiet) {
            std::cout << "solve " << inst.label << ": "
                      << (trace.terminated_by == TerminationCause::Threshold
                              ? "threshold"
                              : "budget")
                      << " after " << trace.evaluations
                      << " evaluations, cost=" << format_double(trace.final_cost)
                      << ", epsilon_upper=" << format_double(cert.epsilon_upper)
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return trace.terminated_by == TerminationCause::Threshold ? kExitOk
                                                              : kExitBudget;
}

// --- bench ---------------------------------------------------------------------

BenchmarkConfig benchmark_config_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed benchmark config: " + std::string(e.what()));
    }
    if (j.value("format", "") != "vqls-bench-config-v1") {
        throw ConfigError("not a vqls-bench-config-v1 file");
    }
    BenchmarkConfig c;
    c.sweep = j.at("sweep").get<std::string>();
    c.values = j.at("values").get<std::vector<double>>();
    if (c.values.empty()) throw ConfigError("sweep values must be nonempty");
    if (j.contains("problem")) {
        const json& p = j.at("problem");
        c.problem.family = p.value("family", c.problem.family);
        c.problem.n = p.value("n", c.problem.n);
        c.problem.kappa = p.value("kappa", c.problem.kappa);
        c.problem.coupling = p.value("coupling", c.problem.coupling);
        c.problem.pair_probability =
            p.value("pair_probability", c.problem.pair_probability);
        c.problem.variant = p.value("variant", c.problem.variant);
    }
    if (j.contains("ansatz")) {
        const json& a = j.at("ansatz");
        c.ansatz.family = a.value("family", c.ansatz.family);
        c.ansatz.layers = a.value("layers", c.ansatz.layers);
        c.ansatz.extended_alphabet =
            a.value("extended_alphabet", c.ansatz.extended_alphabet);
        c.ansatz.rounds = a.value("rounds", c.ansatz.rounds);
        c.ansatz.driver = a.value("driver", c.ansatz.driver);
        c.ansatz.driver_scale = a.value("driver_scale", c.ansatz.driver_scale);
        c.ansatz.blocks = a.value("blocks", c.ansatz.blocks);
    }
    c.kind = cost_kind_from_string(j.value("cost", "local"));
    c.method = optimizer_method_from_string(j.value("method", "random_line_search"));
    c.epsilon = j.value("epsilon", c.epsilon);
    c.tightened = j.value("tightened", c.tightened);
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    if (j.contains("protocol")) {
        const json& p = j.at("protocol");
        c.protocol.runs_per_instance =
            p.value("runs_per_instance", c.protocol.runs_per_instance);
        c.protocol.instances = p.value("instances", c.protocol.instances);
        c.protocol.best_of = p.value("best_of", c.protocol.best_of);
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.output = j.value("output", c.output.string());
    return c;
}

int run_bench(const BenchmarkConfig& config) {
    std::ofstream out;
    std::vector<double> xs, ys;
    int failures = 0;
    try {
        out.open(config.output);
        if (!out) throw ConfigError("cannot open '" + config.output.string() + "'");
        out << "# vqls-bench-v1 value,time_to_solution,success_rate,"
               "unresolved_groups; fit rows: fit:<kind>,<slope>,<r_squared>,\n";
        out << "value,time_to_solution,success_rate,unresolved_groups\n";
        out.flush();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    for (std::size_t i = 0; i < config.values.size(); ++i) {
        const double value = config.values[i];
        try {
            ProblemSpec p = config.problem;
            TerminationRule rule;
            rule.kind = config.kind;
            rule.target_epsilon = config.epsilon;
            rule.use_tightened = config.tightened;
            rule.max_evaluations = config.max_evaluations;
            if (config.sweep == "kappa" || config.sweep == "random") {
                p.kappa = value;
            } else if (config.sweep == "epsilon") {
                rule.target_epsilon = value;
            } else if (config.sweep == "n") {
                p.n = static_cast<int>(value);
            } else {
                throw ConfigError("unknown sweep kind '" + config.sweep + "'");
            }
            if (config.sweep == "random") p.family = "random";

            const std::uint64_t point_seed =
                Rng(config.seed).split(i).seed();
            auto family = [&](int instance_index) {
                ProblemSpec q = p;
                q.seed = Rng(point_seed)
                             .split(static_cast<std::uint64_t>(instance_index))
                             .seed();
                return q.build();
            };
            auto make_ansatz = [&](const QlspInstance& inst) {
                return config.ansatz.build(inst);
            };
            MinimizeOptions options;
            options.threads = config.threads;
            options.deterministic_timing = (config.threads <= 1);
            const TtsResult tts =
                time_to_solution(family, make_ansatz, config.kind, config.method,
                                 rule, config.protocol, point_seed, options);
            const int total = tts.resolved_groups + tts.unresolved_groups;
            const double success =
                total > 0 ? static_cast<double>(tts.resolved_groups) / total : 0.0;
            out << format_double(value) << ","
                << format_double(tts.time_to_solution) << ","
                << format_double(success) << "," << tts.unresolved_groups << "\n";
            out.flush();
            if (tts.resolved_groups > 0 && tts.time_to_solution > 0.0) {
                xs.push_back(value);
                ys.push_back(tts.time_to_solution);
            }
        } catch (const std::exception& e) {
            ++failures;
            out << format_double(value) << ",nan,0,-1\n";
            out.flush();
            std::cerr << "sweep point " << value << " failed: " << e.what() << "\n";
        }
    }

    try {
        if (xs.size() >= 2) {
            if (config.sweep == "epsilon") {
                // time-to-solution against log(1/epsilon)
                std::vector<double> lx(xs.size());
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    lx[i] = std::log(1.0 / xs[i]);
                }
                const LinearFit fit = linear_fit(lx, ys);
                out << "fit:log_inv_epsilon," << format_double(fit.slope) << ","
                    << format_double(fit.r_squared) << ",\n";
            } else {
                const LinearFit fit = power_law_fit(xs, ys);
                out << "fit:power_law," << format_double(fit.slope) << ","
                    << format_double(fit.r_squared) << ",\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
    }
    if (failures == static_cast<int>(config.values.size())) return kExitNumerical;
    return kExitOk;
}

// --- decompose -------------------------------------------------------------------

int run_decompose(const DecomposeConfig& config) {
    SparseOracle oracle(1, std::vector<SparseEntry>{});
    LcuMatrix lcu;
    try {
        oracle = load_sparse_matrix(config.input);
        SparseLcuOptions options;
        options.element_register_bits = config.element_register_bits;
        lcu = sparse_to_lcu(oracle, options);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        QlspInstance out;
        out.A = lcu;
        out.b_prep = Circuit(lcu.n);
        out.label = "sparse-lcu(d=" + std::to_string(oracle.sparsity()) +
                    ",n=" + std::to_string(oracle.num_qubits()) + ")";
        save_problem(config.output, out);
        if (config.verify) {
            const Eigen::MatrixXcd got = assemble_dense(lcu);
            const std::size_t dim = oracle.dim();
            const std::size_t pad = std::size_t{1} << (oracle.num_qubits() + 2);
            Eigen::MatrixXcd want =
                Eigen::MatrixXcd::Zero(dim * pad, dim * pad);
            want.topLeftCorner(dim, dim) = oracle.to_dense();
            const double deviation = (got - want).cwiseAbs().maxCoeff();
            if (!config.quiet) {
                std::cout << "decompose: max reconstruction deviation "
                          << format_double(deviation) << "\n";
            }
            if (!(deviation <= 1e-10)) {
                std::cerr << "numerical failure: reconstruction deviation "
                          << format_double(deviation) << " exceeds 1e-10\n";
                return kExitNumerical;
            }
        } else if (!config.quiet) {
            std::cout << "decompose: wrote " << lcu.terms.size()
                      << "-term LCU on " << lcu.n << " qubits\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

// --- verify ---------------------------------------------------------------------

int run_verify(const VerifyConfig& config) {
    QlspInstance inst;
    Certificate cert;
    try {
        inst = load_problem(config.problem);
        cert = load_certificate(config.certificate);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        if (cert.n != inst.A.n) {
            throw std::runtime_error("certificate register size differs from problem");
        }
        const CostReport report =
            evaluate_cost(inst, cert.solution_circuit, cert.kind);
        if (std::abs(report.value - cert.cost_value) > config.tolerance) {
            throw std::runtime_error(
                "re-evaluated cost " + format_double(report.value) +
                " differs from certificate " + format_double(cert.cost_value));
        }
        const double eps =
            epsilon_bound_value(cert.kind, cert.cost_value, cert.psi_norm_sq,
                                cert.kappa, cert.n);
        if (std::abs(eps - cert.epsilon_upper) > config.tolerance) {
            throw std::runtime_error("epsilon_upper does not match its formula");
        }
        if (inst.A.n <= 10) {
            const double dense_kappa = estimate_kappa_dense(inst.A);
            if (cert.kappa < dense_kappa - 1e-6) {
                throw std::runtime_error(
                    "declared kappa " + format_double(cert.kappa) +
                    " is below the dense estimate " + format_double(dense_kappa));
            }
        }
        const Statevector x =
            run_circuit(cert.solution_circuit, zero_state(inst.A.n));
        for (const ObservableRecord& o : cert.observables) {
            const double ex = expectation_pauli(x, o.pauli);
            if (std::abs(ex - o.expectation) > config.tolerance) {
                throw std::runtime_error("observable " + o.pauli +
                                         " does not reproduce");
            }
        }
        if (!config.quiet) {
            std::cout << "verify: certificate consistent (cost="
                      << format_double(cert.cost_value)
                      << ", epsilon_upper=" << format_double(cert.epsilon_upper)
                      << ")\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace vqls

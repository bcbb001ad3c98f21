#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vqls/harness.hpp"
#include "vqls/threading.hpp"

namespace {

void add_problem_flags(CLI::App* cmd, vqls::ProblemSpec& p,
                       std::string& problem_file) {
    cmd->add_option("--problem", problem_file, "Problem JSON file");
    cmd->add_option("--family", p.family, "Generator family: ising|random|degenerate");
    cmd->add_option("-n,--qubits", p.n, "Qubit count");
    cmd->add_option("--kappa", p.kappa, "Condition number");
    cmd->add_option("-J,--coupling", p.coupling, "Ising coupling J");
    cmd->add_option("--pair-prob", p.pair_probability,
                    "Bernoulli pair probability (random family)");
    cmd->add_option("--variant", p.variant, "Degenerate family variant 1|2|3");
    cmd->add_option("--problem-seed", p.seed, "Instance draw seed");
}

void add_ansatz_flags(CLI::App* cmd, vqls::AnsatzSpec& a) {
    cmd->add_option("--ansatz", a.family, "Ansatz family: hea|qaoa|variable|product");
    cmd->add_option("--layers", a.layers, "HEA layers");
    cmd->add_flag("--extended-alphabet", a.extended_alphabet,
                  "Add RotZ rotations for complex-amplitude problems");
    cmd->add_option("--rounds", a.rounds, "QAOA rounds p");
    cmd->add_option("--driver", a.driver, "QAOA driver: global_hat|local_hat");
    cmd->add_option("--driver-scale", a.driver_scale,
                    "Multiplier on QAOA driver evolution times");
    cmd->add_option("--blocks", a.blocks, "Variable ansatz initial blocks");
    cmd->add_option("--ansatz-seed", a.seed, "Variable ansatz structure seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational quantum linear solver harness"};
    app.require_subcommand(1);

    // solve
    vqls::SolveConfig solve;
    std::string solve_problem_file;
    std::string solve_kind = "local";
    std::string solve_method = "random_line_search";
    std::string solve_trace, solve_cert;
    auto* cmd_solve = app.add_subcommand("solve", "Run one certified solve");
    add_problem_flags(cmd_solve, solve.problem, solve_problem_file);
    add_ansatz_flags(cmd_solve, solve.ansatz);
    cmd_solve->add_option("--cost", solve_kind,
                          "Cost kind: global_hat|global|local_hat|local");
    cmd_solve->add_option("--method", solve_method,
                          "random_line_search|coordinate|gradient_descent|powell");
    cmd_solve->add_option("-e,--epsilon", solve.epsilon, "Target trace distance");
    cmd_solve->add_flag("--tightened", solve.tightened,
                        "Divide the threshold by <psi|psi> (normalized kinds)");
    cmd_solve->add_option("--max-evals", solve.max_evaluations, "Evaluation budget");
    cmd_solve->add_option("--seed", solve.seed, "Optimizer seed");
    cmd_solve->add_option("--threads", solve.threads,
                          "Term-level parallelism; 1 = bitwise deterministic");
    cmd_solve->add_option("--observable", solve.observables,
                          "Pauli word(s) to report on the solution");
    cmd_solve->add_option("--trace", solve_trace, "Trace CSV output path");
    cmd_solve->add_option("--certificate", solve_cert, "Certificate JSON output path");
    cmd_solve->add_flag("--quiet", solve.quiet, "Suppress the summary line");

    // bench
    std::string bench_config;
    auto* cmd_bench = app.add_subcommand("bench", "Run a benchmark sweep");
    cmd_bench->add_option("--config", bench_config, "Benchmark config JSON")
        ->required();

    // decompose
    vqls::DecomposeConfig decompose;
    std::string decompose_in, decompose_out;
    auto* cmd_decompose =
        app.add_subcommand("decompose", "Sparse matrix file -> 4-term LCU problem");
    cmd_decompose->add_option("--input", decompose_in, "Sparse matrix JSON")
        ->required();
    cmd_decompose->add_option("--output", decompose_out, "Problem JSON output")
        ->required();
    cmd_decompose->add_flag("--verify", decompose.verify,
                            "Re-assemble densely and check the reconstruction");
    cmd_decompose->add_option("--element-bits", decompose.element_register_bits,
                              "Bit width of the discarded matrix-element register");
    cmd_decompose->add_flag("--quiet", decompose.quiet, "Suppress output");

    // verify
    vqls::VerifyConfig verify;
    std::string verify_problem, verify_cert;
    auto* cmd_verify =
        app.add_subcommand("verify", "Re-check a certificate against a problem");
    cmd_verify->add_option("--problem", verify_problem, "Problem JSON")->required();
    cmd_verify->add_option("--certificate", verify_cert, "Certificate JSON")
        ->required();
    cmd_verify->add_option("--tolerance", verify.tolerance, "Re-check tolerance");
    cmd_verify->add_flag("--quiet", verify.quiet, "Suppress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vqls::kExitConfig;
    }

    try {
        if (cmd_solve->parsed()) {
            if (!solve_problem_file.empty()) solve.problem.file = solve_problem_file;
            solve.kind = vqls::cost_kind_from_string(solve_kind);
            solve.method = vqls::optimizer_method_from_string(solve_method);
            if (!solve_trace.empty()) solve.trace_path = solve_trace;
            if (!solve_cert.empty()) solve.certificate_path = solve_cert;
            if (solve.threads <= 0) solve.threads = vqls::hardware_threads();
            return vqls::run_solve(solve);
        }
        if (cmd_bench->parsed()) {
            return vqls::run_bench(vqls::benchmark_config_from_file(bench_config));
        }
        if (cmd_decompose->parsed()) {
            decompose.input = decompose_in;
            decompose.output = decompose_out;
            return vqls::run_decompose(decompose);
        }
        if (cmd_verify->parsed()) {
            verify.problem = verify_problem;
            verify.certificate = verify_cert;
            return vqls::run_verify(verify);
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return vqls::kExitConfig;
    }
    return vqls::kExitConfig;
}

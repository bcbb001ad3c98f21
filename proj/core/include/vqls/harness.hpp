#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vqls/ansatz.hpp"
#include "vqls/optimizer.hpp"
#include "vqls/problem.hpp"

namespace vqls {

// Exit codes shared by the CLI subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitNumerical = 4;

// Instance source: either a problem file or generator flags.
struct ProblemSpec {
    std::optional<std::filesystem::path> file;
    std::string family = "ising";  // ising | random | degenerate
    int n = 4;
    double kappa = 10.0;
    double coupling = 0.1;          // ising J
    double pair_probability = 0.3;  // random family
    int variant = 1;                // degenerate family
    std::uint64_t seed = 0;

    QlspInstance build() const;
};

struct AnsatzSpec {
    std::string family = "hea";  // hea | qaoa | variable | product
    int layers = 4;              // hea
    bool extended_alphabet = false;
    int rounds = 1;              // qaoa
    std::string driver = "global_hat";
    double driver_scale = 1.0;
    int blocks = 2;              // variable: initial insertion blocks
    std::uint64_t seed = 0;

    Ansatz build(const QlspInstance& inst) const;
};

struct SolveConfig {
    ProblemSpec problem;
    AnsatzSpec ansatz;
    CostKind kind = CostKind::Local;
    OptimizerMethod method = OptimizerMethod::RandomLineSearch;
    double epsilon = 0.01;
    bool tightened = false;
    std::uint64_t max_evaluations = 200000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<std::string> observables;
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> certificate_path;
    bool quiet = false;
};

// Runs one solve, writes trace CSV and certificate, prints a summary line.
// Exit 0 when terminated by threshold, 2 on budget exhaustion, 3 on config
// errors, 4 on numerical failure.
int run_solve(const SolveConfig& config);

struct BenchmarkConfig {
    std::string sweep = "kappa";  // kappa | epsilon | n | random
    std::vector<double> values;
    ProblemSpec problem;  // family template; the sweep overrides one field
    AnsatzSpec ansatz;
    CostKind kind = CostKind::Local;
    OptimizerMethod method = OptimizerMethod::RandomLineSearch;
    double epsilon = 0.05;
    bool tightened = false;
    std::uint64_t max_evaluations = 200000;
    TtsProtocol protocol;
    std::uint64_t seed = 1;
    int threads = 1;
    std::filesystem::path output = "bench.csv";
};

BenchmarkConfig benchmark_config_from_file(const std::filesystem::path& path);

// Executes the sweep, appending one CSV row per point as it completes, and
// closes with fit summary rows (power-law fit for kappa/n/random sweeps, a
// linear fit in log(1/epsilon) for epsilon sweeps).
int run_bench(const BenchmarkConfig& config);

struct DecomposeConfig {
    std::filesystem::path input;
    std::filesystem::path output;
    bool verify = false;
    int element_register_bits = 8;
    bool quiet = false;
};

// Sparse matrix file -> 4-term LCU problem file (enlarged register). The
// verify flag re-assembles the LCU densely and reports the max deviation
// from A (x) |0~><0~|.
int run_decompose(const DecomposeConfig& config);

struct VerifyConfig {
    std::filesystem::path problem;
    std::filesystem::path certificate;
    double tolerance = 1e-9;
    bool quiet = false;
};

// Re-checks a certificate against a problem file: re-evaluates the cost of
// the embedded solution circuit, recomputes the epsilon bound, and checks the
// declared kappa against the dense estimate when feasible.
int run_verify(const VerifyConfig& config);

}  // namespace vqls

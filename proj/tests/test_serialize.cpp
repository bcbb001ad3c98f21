#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "testutil.hpp"
#include "vqls/ansatz.hpp"
#include "vqls/certify.hpp"
#include "vqls/cost.hpp"
#include "vqls/problem.hpp"
#include "vqls/rng.hpp"
#include "vqls/serialize.hpp"

using namespace vqls;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("vqls_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("gates round-trip structurally") {
    Rng rng(81);
    Circuit c = test::random_circuit(3, 25, rng);
    c.add(Gate::controlled(2, {Gate::ry(0, 0.325), Gate::cz(0, 1)}));
    c.add(Gate::phase(1, -1.25));
    const nlohmann::json j = circuit_to_json(c);
    const Circuit back = circuit_from_json(3, j);
    REQUIRE(back.size() == c.size());
    CHECK(j.dump() == circuit_to_json(back).dump());
    // Same action on a random state.
    const Statevector in = random_state(3, rng);
    const Statevector a = run_circuit(c, in);
    const Statevector b = run_circuit(back, in);
    for (std::size_t i = 0; i < a.dim(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("unitary gates serialize their dense matrix exactly") {
    Rng rng(82);
    const Eigen::MatrixXcd u = test::dense_circuit_oracle(test::random_circuit(2, 9, rng));
    Circuit c(2);
    c.add(Gate::unitary({0, 1}, u));
    const Circuit back = circuit_from_json(2, circuit_to_json(c));
    const Statevector in = random_state(2, rng);
    const Statevector a = run_circuit(c, in);
    const Statevector b = run_circuit(back, in);
    for (std::size_t i = 0; i < a.dim(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("evolution gates materialize as unitaries on write") {
    const QlspInstance inst = ising_qlsp(2, 0.1, 5.0);
    const Ansatz qaoa = build_qaoa(inst, QaoaSpec{});
    const std::vector<double> alpha = {0.37, -0.86};
    const Circuit bound = qaoa.bind(alpha);
    const Circuit back = circuit_from_json(2, circuit_to_json(bound));
    Rng rng(83);
    const Statevector in = random_state(2, rng);
    const Statevector a = run_circuit(bound, in);
    const Statevector b = run_circuit(back, in);
    for (std::size_t i = 0; i < a.dim(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <= 1e-14);
    }
}

TEST_CASE("problem files round-trip bit-exactly") {
    for (const QlspInstance inst :
         {ising_qlsp(3, 0.1, 20.0), random_qlsp(3, 7.0, 0.4, 19),
          degenerate_qlsp(2, 6.0)}) {
        const nlohmann::json j = problem_to_json(inst);
        const QlspInstance back = problem_from_json(j);
        CHECK(problem_to_json(back).dump() == j.dump());
        CHECK(back.kappa == inst.kappa);
        CHECK(back.label == inst.label);
        CHECK((assemble_dense(back.A) - assemble_dense(inst.A)).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("gate-list terms survive the problem format") {
    // The 4-term oracle LCU has no Pauli-word form.
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(4, 4);
    QlspInstance inst;
    inst.A = sparse_to_lcu(SparseOracle::from_dense(eye));
    inst.b_prep = Circuit(inst.A.n);
    inst.label = "decomposed";
    const auto path = temp_file("gatelist.json");
    save_problem(path, inst);
    const QlspInstance back = load_problem(path);
    CHECK(problem_to_json(back).dump() == problem_to_json(inst).dump());
    CHECK((assemble_dense(back.A) - assemble_dense(inst.A)).cwiseAbs().maxCoeff() <=
          1e-14);
    std::filesystem::remove(path);
}

TEST_CASE("written problem files are byte-stable") {
    const QlspInstance inst = random_qlsp(3, 9.0, 0.5, 5);
    const auto p1 = temp_file("stable1.json");
    const auto p2 = temp_file("stable2.json");
    save_problem(p1, inst);
    save_problem(p2, load_problem(p1));
    CHECK(slurp(p1) == slurp(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("malformed problem files are rejected") {
    const auto path = temp_file("bad.json");
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_problem(path), std::invalid_argument);
    std::ofstream(path) << "{\"format\": \"other\"}";
    CHECK_THROWS_AS(load_problem(path), std::invalid_argument);
    std::ofstream(path) << R"({"format": "vqls-problem-v1", "n": 2,
        "terms": [{"coeff": [1, 0], "pauli_word": "XQZ"}],
        "b_prep": [], "kappa": null, "label": ""})";
    CHECK_THROWS_AS(load_problem(path), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST_CASE("certificates round-trip and re-verify") {
    const QlspInstance inst = ising_qlsp(2, 0.1, 5.0);
    const Statevector x0 = dense_solve_oracle(inst);
    const Circuit solution = state_preparation_circuit(x0.amplitudes());
    const CostReport report = evaluate_cost(inst, solution, CostKind::Local);
    const Certificate cert = make_certificate(inst, report, solution, {"ZI"});
    const auto path = temp_file("cert.json");
    save_certificate(path, cert);
    const Certificate back = load_certificate(path);
    CHECK(back.kind == cert.kind);
    CHECK(back.cost_value == cert.cost_value);
    CHECK(back.kappa == cert.kappa);
    CHECK(back.epsilon_upper == cert.epsilon_upper);
    CHECK(back.psi_norm_sq == cert.psi_norm_sq);
    REQUIRE(back.observables.size() == 1);
    CHECK(back.observables[0].pauli == "ZI");
    // The embedded circuit reproduces the cost.
    const CostReport again = evaluate_cost(inst, back.solution_circuit, CostKind::Local);
    CHECK(std::abs(again.value - back.cost_value) <= 1e-12);
    std::filesystem::remove(path);
}

TEST_CASE("trace csv carries the versioned schema") {
    OptimizerTrace trace;
    trace.history.push_back({1, 0.5, 0.9, 0.0});
    trace.history.push_back({7, 0.25, 0.8, 0.0});
    TerminationRule rule;
    rule.kind = CostKind::Local;
    rule.kappa = 10.0;
    rule.n = 3;
    const auto path = temp_file("trace.csv");
    write_trace_csv(path, trace, rule);
    const std::string text = slurp(path);
    CHECK(text.rfind("# vqls-trace-v1", 0) == 0);
    CHECK(text.find("eval_index,cost,psi_norm_sq,epsilon_bound,wallclock_ms") !=
          std::string::npos);
    int lines = 0;
    for (char ch : text) lines += (ch == '\n');
    CHECK(lines == 4);  // comment + header + two rows
    // Byte-stable on rewrite.
    const auto path2 = temp_file("trace2.csv");
    write_trace_csv(path2, trace, rule);
    CHECK(slurp(path2) == text);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("sparse matrix files round-trip") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 1) = cplx{0.25, -0.125};
    m(1, 0) = cplx{0.25, 0.125};
    m(3, 3) = 0.875;
    const auto path = temp_file("sparse.json");
    save_sparse_matrix(path, SparseOracle::from_dense(m));
    const SparseOracle back = load_sparse_matrix(path);
    CHECK((back.to_dense() - m).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("format_double survives a parse round trip") {
    for (double v : {0.1, 1.0 / 3.0, 2.5e-7, 1e300, -0.0, 123456789.123456789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

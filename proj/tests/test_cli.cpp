#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "vqls/certify.hpp"
#include "vqls/problem.hpp"
#include "vqls/serialize.hpp"

using namespace vqls;

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
    const char* p = std::getenv("VQLS_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "VQLS_CLI_PATH must point at the vqls binary");
    return p;
}

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / "vqls_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("solve writes a certificate and trace and exits 0 on threshold") {
    TempDir tmp;
    const fs::path cert = tmp / "cert.json";
    const fs::path trace = tmp / "trace.csv";
    const int code =
        run("solve --family ising -n 3 -J 0 --kappa 10 --epsilon 0.05 "
            "--cost local --method random_line_search --layers 2 --seed 3 "
            "--max-evals 60000 --certificate " + cert.string() +
            " --trace " + trace.string() + " --quiet");
    CHECK(code == 0);
    REQUIRE(fs::exists(cert));
    REQUIRE(fs::exists(trace));
    const Certificate c = load_certificate(cert);
    CHECK(c.epsilon_upper <= 0.05);
    CHECK(slurp(trace).rfind("# vqls-trace-v1", 0) == 0);
}

TEST_CASE("budget exhaustion exits 2 but still writes the trace") {
    TempDir tmp;
    const fs::path trace = tmp / "trace.csv";
    const int code =
        run("solve --family ising -n 3 --kappa 40 --epsilon 0.01 --cost local "
            "--layers 2 --max-evals 10 --seed 1 --trace " + trace.string() +
            " --quiet");
    CHECK(code == 2);
    CHECK(fs::exists(trace));
}

TEST_CASE("config errors exit 3") {
    TempDir tmp;
    const fs::path bad = tmp / "bad.json";
    std::ofstream(bad) << "{ nope";
    CHECK(run("solve --problem " + bad.string()) == 3);
    CHECK(run("solve --family unknown") == 3);
    CHECK(run("bench --config " + (tmp / "missing.json").string()) == 3);
    CHECK(run("nonsense") == 3);
}

TEST_CASE("solve on a problem file plus verify round trip") {
    TempDir tmp;
    const fs::path problem = tmp / "problem.json";
    const fs::path cert = tmp / "cert.json";
    save_problem(problem, ising_qlsp(2, 0.1, 5.0));
    const int solved =
        run("solve --problem " + problem.string() +
            " --epsilon 0.1 --cost global --method powell --layers 1 --seed 5 "
            "--observable ZI --certificate " + cert.string() + " --quiet");
    CHECK(solved == 0);
    CHECK(run("verify --problem " + problem.string() + " --certificate " +
              cert.string() + " --quiet") == 0);

    // Tampering with the cost value must fail verification.
    nlohmann::json j;
    {
        std::ifstream in(cert);
        in >> j;
    }
    j["cost_value"] = 0.5;
    std::ofstream(cert) << j.dump(2);
    CHECK(run("verify --problem " + problem.string() + " --certificate " +
              cert.string() + " --quiet") == 4);
}

TEST_CASE("decompose verifies the sparse reconstruction") {
    TempDir tmp;
    const fs::path input = tmp / "sparse.json";
    const fs::path output = tmp / "lcu.json";
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = 0.5;
    m(1, 2) = cplx{0.25, 0.25};
    m(2, 1) = cplx{0.25, -0.25};
    save_sparse_matrix(input, SparseOracle::from_dense(m));
    CHECK(run("decompose --input " + input.string() + " --output " +
              output.string() + " --verify --quiet") == 0);
    const QlspInstance lcu = load_problem(output);
    CHECK(lcu.A.n == 6);
    CHECK(lcu.A.terms.size() == 4);

    // Non-Hermitian input is a config error.
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(4, 4);
    bad(0, 1) = 0.5;
    save_sparse_matrix(input, SparseOracle::from_dense(bad));
    CHECK(run("decompose --input " + input.string() + " --output " +
              output.string() + " --quiet") == 3);
}

TEST_CASE("bench sweeps emit data rows and a fit row") {
    TempDir tmp;
    const fs::path config = tmp / "bench.json";
    const fs::path out = tmp / "bench.csv";
    nlohmann::json j = {
        {"format", "vqls-bench-config-v1"},
        {"sweep", "kappa"},
        {"values", {5.0, 10.0, 20.0}},
        {"problem", {{"family", "ising"}, {"n", 2}, {"coupling", 0.1}}},
        {"ansatz", {{"family", "hea"}, {"layers", 2}}},
        {"cost", "local"},
        {"method", "random_line_search"},
        {"epsilon", 0.1},
        {"max_evaluations", 50000},
        {"protocol",
         {{"runs_per_instance", 2}, {"instances", 1}, {"best_of", 1}}},
        {"seed", 11},
        {"output", out.string()},
    };
    std::ofstream(config) << j.dump(2);
    CHECK(run("bench --config " + config.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("# vqls-bench-v1", 0) == 0);
    CHECK(text.find("\n5,") != std::string::npos);
    CHECK(text.find("\n10,") != std::string::npos);
    CHECK(text.find("\n20,") != std::string::npos);
    CHECK(text.find("fit:power_law,") != std::string::npos);
}

TEST_CASE("single-threaded traces are byte-identical across runs") {
    TempDir tmp;
    const fs::path t1 = tmp / "t1.csv";
    const fs::path t2 = tmp / "t2.csv";
    const std::string base =
        "solve --family random -n 2 --kappa 6 --problem-seed 4 --epsilon 0.1 "
        "--cost local_hat --method coordinate --layers 1 --seed 9 --threads 1 "
        "--quiet --trace ";
    CHECK(run(base + t1.string()) == 0);
    CHECK(run(base + t2.string()) == 0);
    CHECK(slurp(t1) == slurp(t2));
    CHECK(!slurp(t1).empty());
}

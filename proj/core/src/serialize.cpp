#include "vqls/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace vqls {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("serialize: " + msg);
}

json complex_to_json(const cplx& c) { return json::array({c.real(), c.imag()}); }

cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) fail("complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json write_file_checked(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) fail("write to '" + path.string() + "' failed");
    return j;
}

json read_file_checked(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("malformed JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- Gates ------------------------------------------------------------------

json gate_to_json(const Gate& g) {
    json j;
    switch (g.kind) {
        case GateKind::RotY:
            j = {{"kind", "ry"}, {"target", g.targets[0]}, {"theta", g.theta}};
            break;
        case GateKind::RotZ:
            j = {{"kind", "rz"}, {"target", g.targets[0]}, {"theta", g.theta}};
            break;
        case GateKind::Hadamard:
            j = {{"kind", "h"}, {"target", g.targets[0]}};
            break;
        case GateKind::PauliX:
            j = {{"kind", "x"}, {"target", g.targets[0]}};
            break;
        case GateKind::PauliY:
            j = {{"kind", "y"}, {"target", g.targets[0]}};
            break;
        case GateKind::PauliZ:
            j = {{"kind", "z"}, {"target", g.targets[0]}};
            break;
        case GateKind::Phase:
            j = {{"kind", "phase"}, {"target", g.targets[0]}, {"theta", g.theta}};
            break;
        case GateKind::ControlledZ:
            j = {{"kind", "cz"}, {"targets", g.targets}};
            break;
        case GateKind::ControlledNot:
            j = {{"kind", "cnot"}, {"control", g.targets[0]}, {"target", g.targets[1]}};
            break;
        case GateKind::ControlledUnitary: {
            json inner = json::array();
            for (const Gate& ig : g.inner) inner.push_back(gate_to_json(ig));
            j = {{"kind", "cu"}, {"control", g.targets[0]}, {"inner", std::move(inner)}};
            break;
        }
        case GateKind::Unitary:
        case GateKind::Evolution: {
            const Eigen::MatrixXcd m = g.block_matrix();
            // block_matrix() is laid out on the sorted touched qubits, which
            // for these kinds equals the target list order only when sorted.
            std::vector<int> sorted = g.targets;
            std::sort(sorted.begin(), sorted.end());
            json rows = json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    rows.push_back(complex_to_json(m(r, c)));
                }
            }
            j = {{"kind", "unitary"}, {"targets", sorted}, {"matrix", std::move(rows)}};
            break;
        }
    }
    return j;
}

Gate gate_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ry") return Gate::ry(j.at("target"), j.at("theta"));
    if (kind == "rz") return Gate::rz(j.at("target"), j.at("theta"));
    if (kind == "h") return Gate::h(j.at("target"));
    if (kind == "x") return Gate::x(j.at("target"));
    if (kind == "y") return Gate::y(j.at("target"));
    if (kind == "z") return Gate::z(j.at("target"));
    if (kind == "phase") return Gate::phase(j.at("target"), j.at("theta"));
    if (kind == "cz") {
        const auto t = j.at("targets").get<std::vector<int>>();
        if (t.size() != 2) fail("cz needs two targets");
        return Gate::cz(t[0], t[1]);
    }
    if (kind == "cnot") return Gate::cnot(j.at("control"), j.at("target"));
    if (kind == "cu") {
        std::vector<Gate> inner;
        for (const json& ig : j.at("inner")) inner.push_back(gate_from_json(ig));
        return Gate::controlled(j.at("control"), std::move(inner));
    }
    if (kind == "unitary") {
        const auto targets = j.at("targets").get<std::vector<int>>();
        const auto& rows = j.at("matrix");
        const std::size_t dim = std::size_t{1} << targets.size();
        if (rows.size() != dim * dim) fail("unitary matrix size mismatch");
        Eigen::MatrixXcd m(dim, dim);
        std::size_t k = 0;
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    complex_from_json(rows[k++]);
            }
        }
        return Gate::unitary(targets, std::move(m));
    }
    fail("unknown gate kind '" + kind + "'");
}

json circuit_to_json(const Circuit& c) {
    json gates = json::array();
    for (const Gate& g : c.gates) gates.push_back(gate_to_json(g));
    return gates;
}

Circuit circuit_from_json(int n, const json& gates) {
    Circuit c(n);
    if (!gates.is_array()) fail("gate list must be an array");
    for (const json& g : gates) c.add(gate_from_json(g));
    return c;
}

// --- Problem files ------------------------------------------------------------

json problem_to_json(const QlspInstance& inst) {
    json terms = json::array();
    for (const LcuTerm& t : inst.A.terms) {
        json jt;
        jt["coeff"] = complex_to_json(t.coeff);
        if (!t.pauli.empty()) {
            jt["pauli_word"] = t.pauli;
        } else {
            jt["gates"] = circuit_to_json(t.unitary);
        }
        terms.push_back(std::move(jt));
    }
    json j;
    j["format"] = "vqls-problem-v1";
    j["n"] = inst.A.n;
    j["terms"] = std::move(terms);
    j["b_prep"] = circuit_to_json(inst.b_prep);
    if (inst.kappa) {
        j["kappa"] = *inst.kappa;
    } else {
        j["kappa"] = nullptr;
    }
    j["label"] = inst.label;
    return j;
}

QlspInstance problem_from_json(const json& j) {
    if (j.value("format", "") != "vqls-problem-v1") {
        fail("not a vqls-problem-v1 file");
    }
    QlspInstance inst;
    const int n = j.at("n").get<int>();
    if (n < 1) fail("problem needs n >= 1");
    inst.A.n = n;
    for (const json& jt : j.at("terms")) {
        const cplx coeff = complex_from_json(jt.at("coeff"));
        if (jt.contains("pauli_word")) {
            const std::string word = jt.at("pauli_word").get<std::string>();
            if (static_cast<int>(word.size()) != n) {
                fail("pauli_word length must equal n");
            }
            inst.A.terms.push_back(pauli_term(n, coeff, word));
        } else if (jt.contains("gates")) {
            inst.A.terms.push_back({coeff, circuit_from_json(n, jt.at("gates")), ""});
        } else {
            fail("term needs pauli_word or gates");
        }
    }
    if (inst.A.terms.empty()) fail("problem needs at least one term");
    inst.b_prep = circuit_from_json(n, j.at("b_prep"));
    if (j.contains("kappa") && !j.at("kappa").is_null()) {
        const double kappa = j.at("kappa").get<double>();
        if (kappa < 1.0) fail("kappa must be >= 1");
        inst.kappa = kappa;
    }
    inst.label = j.value("label", "");
    return inst;
}

void save_problem(const std::filesystem::path& path, const QlspInstance& inst) {
    write_file_checked(path, problem_to_json(inst));
}

QlspInstance load_problem(const std::filesystem::path& path) {
    return problem_from_json(read_file_checked(path));
}

// --- Certificates ----------------------------------------------------------------

json certificate_to_json(const Certificate& cert) {
    json obs = json::array();
    for (const ObservableRecord& o : cert.observables) {
        obs.push_back({{"pauli", o.pauli},
                       {"expectation", o.expectation},
                       {"deviation_bound", o.deviation_bound}});
    }
    json j;
    j["format"] = "vqls-certificate-v1";
    j["kind"] = to_string(cert.kind);
    j["cost_value"] = cert.cost_value;
    j["kappa"] = cert.kappa;
    j["n"] = cert.n;
    j["psi_norm_sq"] = cert.psi_norm_sq;
    j["epsilon_upper"] = cert.epsilon_upper;
    j["observables"] = std::move(obs);
    j["solution_gates"] = circuit_to_json(cert.solution_circuit);
    j["label"] = cert.label;
    return j;
}

Certificate certificate_from_json(const json& j) {
    if (j.value("format", "") != "vqls-certificate-v1") {
        fail("not a vqls-certificate-v1 file");
    }
    Certificate cert;
    cert.kind = cost_kind_from_string(j.at("kind").get<std::string>());
    cert.cost_value = j.at("cost_value").get<double>();
    cert.kappa = j.at("kappa").get<double>();
    cert.n = j.at("n").get<int>();
    cert.psi_norm_sq = j.at("psi_norm_sq").get<double>();
    cert.epsilon_upper = j.at("epsilon_upper").get<double>();
    for (const json& o : j.at("observables")) {
        cert.observables.push_back({o.at("pauli").get<std::string>(),
                                    o.at("expectation").get<double>(),
                                    o.at("deviation_bound").get<double>()});
    }
    cert.solution_circuit = circuit_from_json(cert.n, j.at("solution_gates"));
    cert.label = j.value("label", "");
    return cert;
}

void save_certificate(const std::filesystem::path& path, const Certificate& cert) {
    write_file_checked(path, certificate_to_json(cert));
}

Certificate load_certificate(const std::filesystem::path& path) {
    return certificate_from_json(read_file_checked(path));
}

// --- CSV -------------------------------------------------------------------------

void write_trace_csv(const std::filesystem::path& path,
                     const OptimizerTrace& trace, const TerminationRule& rule) {
    std::ofstream out(path);
    if (!out) fail("cannot open '" + path.string() + "' for writing");
    out << "# vqls-trace-v1 eval_index,cost,psi_norm_sq,epsilon_bound,wallclock_ms\n";
    out << "eval_index,cost,psi_norm_sq,epsilon_bound,wallclock_ms\n";
    for (const TraceEntry& e : trace.history) {
        const double eps = epsilon_bound_value(rule.kind, e.cost, e.psi_norm_sq,
                                               rule.kappa, rule.n);
        out << e.evaluation << "," << format_double(e.cost) << ","
            << format_double(e.psi_norm_sq) << "," << format_double(eps) << ","
            << format_double(e.wallclock_ms) << "\n";
    }
    if (!out) fail("write to '" + path.string() + "' failed");
}

// --- Sparse matrix files -----------------------------------------------------------

SparseOracle load_sparse_matrix(const std::filesystem::path& path) {
    const json j = read_file_checked(path);
    if (j.value("format", "") != "vqls-sparse-v1") fail("not a vqls-sparse-v1 file");
    const int n = j.at("n").get<int>();
    std::vector<SparseEntry> entries;
    for (const json& e : j.at("entries")) {
        entries.push_back({e.at("row").get<std::size_t>(),
                           e.at("col").get<std::size_t>(),
                           cplx{e.at("re").get<double>(), e.value("im", 0.0)}});
    }
    return SparseOracle(n, std::move(entries));
}

void save_sparse_matrix(const std::filesystem::path& path, const SparseOracle& m) {
    json entries = json::array();
    for (std::size_t row = 0; row < m.dim(); ++row) {
        for (std::size_t l = 0; l < m.row_degree(row); ++l) {
            const std::size_t col = m.neighbor(row, l);
            const cplx v = m.entry(row, col);
            entries.push_back({{"row", row},
                               {"col", col},
                               {"re", v.real()},
                               {"im", v.imag()}});
        }
    }
    json j;
    j["format"] = "vqls-sparse-v1";
    j["n"] = m.num_qubits();
    j["entries"] = std::move(entries);
    write_file_checked(path, j);
}

}  // namespace vqls

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqls/certify.hpp"
#include "vqls/optimizer.hpp"
#include "vqls/problem.hpp"
#include "vqls/simulator.hpp"

namespace vqls {

// Gate-list encoding shared by problem files, b_prep blocks and certificate
// solution circuits. Evolution gates are materialized as dense unitaries on
// write; everything else round-trips structurally.
nlohmann::json gate_to_json(const Gate& g);
Gate gate_from_json(const nlohmann::json& j);
nlohmann::json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(int n, const nlohmann::json& gates);

// Problem files: {"format": "vqls-problem-v1", n, terms, b_prep, kappa,
// label}; each term is {"coeff": [re, im]} plus either "pauli_word" or a
// "gates" list (terms built from oracle circuits are not single Pauli words).
nlohmann::json problem_to_json(const QlspInstance& inst);
QlspInstance problem_from_json(const nlohmann::json& j);
void save_problem(const std::filesystem::path& path, const QlspInstance& inst);
QlspInstance load_problem(const std::filesystem::path& path);

// Certificate files: {"format": "vqls-certificate-v1", ...} embedding the
// bound solution circuit so `verify` can re-evaluate the cost.
nlohmann::json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const nlohmann::json& j);
void save_certificate(const std::filesystem::path& path, const Certificate& cert);
Certificate load_certificate(const std::filesystem::path& path);

// Trace CSV: "# vqls-trace-v1" header comment, then
// eval_index,cost,psi_norm_sq,epsilon_bound,wallclock_ms rows per accepted
// iterate. epsilon_bound is recomputed from the rule's kind/kappa/n.
void write_trace_csv(const std::filesystem::path& path,
                     const OptimizerTrace& trace, const TerminationRule& rule);

// Sparse matrix input for `decompose`:
// {"format": "vqls-sparse-v1", "n": qubits, "entries": [{"row", "col",
//  "re", "im"}]}.
SparseOracle load_sparse_matrix(const std::filesystem::path& path);
void save_sparse_matrix(const std::filesystem::path& path, const SparseOracle& m);

// Locale-independent shortest round-trip double formatting used by the CSV
// writers.
std::string format_double(double v);

}  // namespace vqls

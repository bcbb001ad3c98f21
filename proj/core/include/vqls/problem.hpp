#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqls/simulator.hpp"

namespace vqls {

class Rng;

// One unitary term of a linear combination A = sum_l c_l A_l. `pauli` is kept
// alongside the circuit when the term is a plain Pauli word so files can
// round-trip in the compact form; it is empty otherwise.
struct LcuTerm {
    cplx coeff;
    Circuit unitary;
    std::string pauli;
};

struct LcuMatrix {
    int n = 0;
    std::vector<LcuTerm> terms;

    std::size_t size() const { return terms.size(); }
    // sum_l |c_l|
    double coeff_l1() const;
};

// A linear-system instance: A as an LCU, the |b> preparation circuit, and the
// condition number when it is known by construction.
struct QlspInstance {
    LcuMatrix A;
    Circuit b_prep;
    std::optional<double> kappa;
    std::string label;

    int num_qubits() const { return A.n; }
    Statevector b_state() const { return run_circuit(b_prep, zero_state(A.n)); }
};

// Row-sparse Hermitian matrix exposed through entry and neighbor queries.
// `neighbor(j, l)` returns the column of the l-th nonzero of row j for
// l < row_degree(j), and pads with the remaining columns in ascending order
// beyond that, making the map a permutation for every row.
struct SparseEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    cplx value;
};

class SparseOracle {
  public:
    SparseOracle(int n, std::vector<SparseEntry> entries);
    static SparseOracle from_dense(const Eigen::MatrixXcd& m);

    int num_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    // Max nonzeros in any row.
    int sparsity() const { return d_; }
    bool is_hermitian(double tol = 1e-12) const;
    double max_entry_magnitude() const;

    cplx entry(std::size_t row, std::size_t col) const;
    std::size_t neighbor(std::size_t row, std::size_t l) const;
    std::size_t row_degree(std::size_t row) const { return rows_[row].size(); }

    Eigen::MatrixXcd to_dense() const;

  private:
    int n_;
    int d_;
    std::vector<std::vector<std::pair<std::size_t, cplx>>> rows_;
};

// --- Benchmark families ------------------------------------------------------

// A = (1/zeta) (sum_j X_j + J sum_j Z_j Z_{j+1} + eta I) with zeta, eta fixed
// numerically so the dense spectrum spans exactly [1/kappa, 1].
// |b> = H^{x n}|0...0>. The LCU has 2n terms (n X terms, n-1 ZZ terms, I).
QlspInstance ising_qlsp(int n, double coupling, double kappa);

// A = xi1 (I + xi2 sum_{j != k} p a_{jk} sigma^alpha_j sigma^beta_k) with
// p ~ Bernoulli(pair_probability), a_{jk} ~ U(-1,1) and alpha, beta uniform
// over {x,y,z}; xi1, xi2 rescale the spectrum to [1/kappa, 1]. Deterministic
// under the seed. Draws are retried a bounded number of times when the Pauli
// sum comes out empty or cannot be rescaled.
QlspInstance random_qlsp(int n, double kappa, double pair_probability,
                         std::uint64_t seed);
QlspInstance random_qlsp(int n, double kappa, double pair_probability,
                         std::uint64_t seed, const Circuit& b_prep);

// The three 8x8 diagonal benchmark matrices with minimum-eigenvalue
// degeneracy g = 1, 2, 4 for variant = 1, 2, 3; |b> = H^{x 3}|000>.
QlspInstance degenerate_qlsp(int variant, double kappa);

// Four-term LCU of a Hermitian d-sparse matrix on an enlarged register of
// 2n+2 qubits (row register, column register, two flag qubits): with
// W = Ux^dag Uy S and E = exp(i pi P),
//   A (x) |0~><0~| = (d/4) (W - EW - WE + EWE).
// Internally d is rounded up to a power of two so the column superposition is
// a Hadamard layer; padded neighbors carry zero entries and drop out of the
// reconstruction. The temporary matrix-element register of the oracle-query
// construction is uncomputed and therefore not part of the returned register;
// `element_register_bits` records its width for resource accounting only.
struct SparseLcuOptions {
    int element_register_bits = 8;
    int max_qubits = 4;  // dense oracle unitaries; 2n+2 simulated qubits
};
LcuMatrix sparse_to_lcu(const SparseOracle& oracle,
                        const SparseLcuOptions& options = {});

// Total qubit count of the construction including the uncomputed temporary
// register: 2n + 2 + element_register_bits.
int sparse_lcu_total_qubits(int n, const SparseLcuOptions& options = {});

// --- Dense reference paths ---------------------------------------------------

// sum_l c_l dense(A_l); capped at 12 qubits.
Eigen::MatrixXcd assemble_dense(const LcuMatrix& a);

// Classical solve of A x = b; returns the normalized solution state.
// Throws on (numerically) singular A. Capped at 12 qubits.
Statevector dense_solve_oracle(const QlspInstance& instance);

// Condition number from dense singular values; capped at 10 qubits.
double estimate_kappa_dense(const LcuMatrix& a);

// Extreme eigenvalues of a Hermitian matrix.
std::pair<double, double> hermitian_eigen_range(const Eigen::MatrixXcd& h);

// Dense N x N matrix of one Pauli word (index i of the word = qubit i).
Eigen::MatrixXcd pauli_word_dense(int n, const std::string& word);

// LCU term helper for a Pauli word with coefficient c.
LcuTerm pauli_term(int n, cplx coeff, const std::string& word);

}  // namespace vqls

#include "vqls/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "vqls/rng.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("problem: " + msg);
}

constexpr int kDenseCap = 12;

std::uint64_t bit(int q) { return std::uint64_t{1} << q; }

Circuit hadamard_all(int n) {
    Circuit c(n);
    for (int q = 0; q < n; ++q) c.add(Gate::h(q));
    return c;
}

std::string identity_word(int n) { return std::string(static_cast<std::size_t>(n), 'I'); }

// Progressive dense build; whole-register Unitary/Evolution gates turn into a
// single matrix product instead of per-column kernel application.
Eigen::MatrixXcd dense_of_circuit(const Circuit& c) {
    if (c.n > kDenseCap) fail("dense assembly capped at 12 qubits");
    const std::size_t dim = std::size_t{1} << c.n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const Gate& g : c.gates) {
        const bool full_register =
            (g.kind == GateKind::Unitary || g.kind == GateKind::Evolution) &&
            static_cast<int>(g.targets.size()) == c.n;
        if (full_register) {
            u = g.block_matrix() * u;
            continue;
        }
        for (std::size_t col = 0; col < dim; ++col) {
            Statevector column = Statevector::from_amplitudes(
                c.n,
                std::vector<cplx>(u.col(col).data(), u.col(col).data() + dim),
                true);
            apply_gate(column, g);
            for (std::size_t row = 0; row < dim; ++row) {
                u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                    column[row];
            }
        }
    }
    return u;
}

}  // namespace

double LcuMatrix::coeff_l1() const {
    double acc = 0.0;
    for (const LcuTerm& t : terms) acc += std::abs(t.coeff);
    return acc;
}

// --- SparseOracle -----------------------------------------------------------

SparseOracle::SparseOracle(int n, std::vector<SparseEntry> entries)
    : n_(n), d_(0) {
    if (n < 1) fail("sparse oracle needs at least one qubit");
    rows_.assign(dim(), {});
    for (const auto& t : entries) {
        if (t.row >= dim() || t.col >= dim()) {
            fail("sparse entry index out of range");
        }
        if (std::abs(t.value) == 0.0) continue;
        rows_[t.row].push_back({t.col, t.value});
    }
    for (auto& row : rows_) {
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (row[k].first == row[k - 1].first) fail("duplicate sparse entry");
        }
        d_ = std::max(d_, static_cast<int>(row.size()));
    }
    d_ = std::max(d_, 1);
}

SparseOracle SparseOracle::from_dense(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) fail("sparse oracle needs a square matrix");
    int n = 0;
    while ((Eigen::Index{1} << n) < m.rows()) ++n;
    if ((Eigen::Index{1} << n) != m.rows()) fail("matrix dimension must be a power of two");
    std::vector<SparseEntry> entries;
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        for (Eigen::Index i = 0; i < m.cols(); ++i) {
            if (std::abs(m(j, i)) != 0.0) {
                entries.push_back({static_cast<std::size_t>(j),
                                   static_cast<std::size_t>(i), m(j, i)});
            }
        }
    }
    return SparseOracle(n, std::move(entries));
}

bool SparseOracle::is_hermitian(double tol) const {
    for (std::size_t j = 0; j < dim(); ++j) {
        for (const auto& [i, v] : rows_[j]) {
            if (std::abs(v - std::conj(entry(i, j))) > tol) return false;
        }
    }
    return true;
}

double SparseOracle::max_entry_magnitude() const {
    double m = 0.0;
    for (const auto& row : rows_) {
        for (const auto& [i, v] : row) m = std::max(m, std::abs(v));
    }
    return m;
}

cplx SparseOracle::entry(std::size_t row, std::size_t col) const {
    const auto& r = rows_[row];
    auto it = std::lower_bound(
        r.begin(), r.end(), col,
        [](const auto& e, std::size_t c) { return e.first < c; });
    if (it != r.end() && it->first == col) return it->second;
    return cplx{0.0, 0.0};
}

std::size_t SparseOracle::neighbor(std::size_t row, std::size_t l) const {
    const auto& r = rows_[row];
    if (l < r.size()) return r[l].first;
    // Pad with the absent columns in ascending order.
    std::size_t want = l - r.size();
    std::size_t seen = 0;
    std::size_t next_present = 0;
    for (std::size_t col = 0; col < dim(); ++col) {
        if (next_present < r.size() && r[next_present].first == col) {
            ++next_present;
            continue;
        }
        if (seen == want) return col;
        ++seen;
    }
    fail("neighbor index out of range");
}

Eigen::MatrixXcd SparseOracle::to_dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(), dim());
    for (std::size_t j = 0; j < dim(); ++j) {
        for (const auto& [i, v] : rows_[j]) {
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return m;
}

// --- Pauli helpers ----------------------------------------------------------

Eigen::MatrixXcd pauli_word_dense(int n, const std::string& word) {
    if (static_cast<int>(word.size()) > n) fail("pauli word longer than register");
    std::uint64_t xmask = 0, zmask = 0;
    int ny = 0;
    for (std::size_t q = 0; q < word.size(); ++q) {
        switch (word[q]) {
            case 'I': break;
            case 'X': xmask |= bit(static_cast<int>(q)); break;
            case 'Y': xmask |= bit(static_cast<int>(q)); zmask |= bit(static_cast<int>(q)); ++ny; break;
            case 'Z': zmask |= bit(static_cast<int>(q)); break;
            default: fail("pauli word may contain only I, X, Y, Z");
        }
    }
    const std::size_t dim = std::size_t{1} << n;
    const cplx iu{0.0, 1.0};
    cplx yfactor{1.0, 0.0};
    for (int k = 0; k < ny; ++k) yfactor *= iu;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::uint64_t col = 0; col < dim; ++col) {
        const int par = __builtin_popcountll(col & zmask) & 1;
        m(static_cast<Eigen::Index>(col ^ xmask), static_cast<Eigen::Index>(col)) =
            par ? -yfactor : yfactor;
    }
    return m;
}

LcuTerm pauli_term(int n, cplx coeff, const std::string& word) {
    LcuTerm t;
    t.coeff = coeff;
    t.unitary = pauli_word_circuit(n, word);
    t.pauli = word;
    t.pauli.resize(static_cast<std::size_t>(n), 'I');
    return t;
}

std::pair<double, double> hermitian_eigen_range(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) fail("eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

// --- Benchmark families ------------------------------------------------------

QlspInstance ising_qlsp(int n, double coupling, double kappa) {
    if (n < 2) fail("ising_qlsp needs n >= 2");
    if (n > kDenseCap) fail("ising_qlsp rescaling needs n <= 12");
    if (coupling < 0.0) fail("ising_qlsp needs J >= 0");
    if (kappa <= 1.0) fail("ising_qlsp needs kappa > 1");

    // Unscaled Pauli sum and its extreme eigenvalues.
    std::vector<std::pair<double, std::string>> words;
    for (int j = 0; j < n; ++j) {
        std::string w = identity_word(n);
        w[static_cast<std::size_t>(j)] = 'X';
        words.emplace_back(1.0, w);
    }
    for (int j = 0; j + 1 < n; ++j) {
        std::string w = identity_word(n);
        w[static_cast<std::size_t>(j)] = 'Z';
        w[static_cast<std::size_t>(j + 1)] = 'Z';
        words.emplace_back(coupling, w);
    }
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [c, w] : words) h0 += c * pauli_word_dense(n, w);
    const auto [lmin, lmax] = hermitian_eigen_range(h0);

    // (lambda + eta)/zeta maps [lmin, lmax] onto [1/kappa, 1].
    const double eta = (lmax - kappa * lmin) / (kappa - 1.0);
    const double zeta = lmax + eta;

    LcuMatrix a;
    a.n = n;
    for (const auto& [c, w] : words) {
        if (w.find('Z') == std::string::npos) {
            a.terms.push_back(pauli_term(n, c / zeta, w));
        }
    }
    for (const auto& [c, w] : words) {
        if (w.find('Z') != std::string::npos) {
            a.terms.push_back(pauli_term(n, c / zeta, w));
        }
    }
    a.terms.push_back(pauli_term(n, eta / zeta, identity_word(n)));

    QlspInstance inst;
    inst.A = std::move(a);
    inst.b_prep = hadamard_all(n);
    inst.kappa = kappa;
    inst.label = "ising(n=" + std::to_string(n) + ",J=" + std::to_string(coupling) +
                 ",kappa=" + std::to_string(kappa) + ")";
    return inst;
}

QlspInstance random_qlsp(int n, double kappa, double pair_probability,
                         std::uint64_t seed) {
    QlspInstance inst = random_qlsp(n, kappa, pair_probability, seed, hadamard_all(n));
    return inst;
}

QlspInstance random_qlsp(int n, double kappa, double pair_probability,
                         std::uint64_t seed, const Circuit& b_prep) {
    if (n < 2) fail("random_qlsp needs n >= 2");
    if (n > kDenseCap) fail("random_qlsp rescaling needs n <= 12");
    if (kappa <= 1.0) fail("random_qlsp needs kappa > 1");
    if (pair_probability < 0.0 || pair_probability > 1.0) {
        fail("pair_probability must lie in [0, 1]");
    }
    if (b_prep.n != n) fail("b_prep register size mismatch");

    const char axes[3] = {'X', 'Y', 'Z'};
    const int max_attempts = 64;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng = Rng(seed).split(static_cast<std::uint64_t>(attempt));
        std::vector<std::pair<double, std::string>> drawn;
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                if (k == j) continue;
                const bool keep = rng.bernoulli(pair_probability);
                const double weight = rng.uniform(-1.0, 1.0);
                const char alpha = axes[rng.uniform_index(3)];
                const char beta = axes[rng.uniform_index(3)];
                if (!keep) continue;
                std::string w = identity_word(n);
                w[static_cast<std::size_t>(j)] = alpha;
                w[static_cast<std::size_t>(k)] = beta;
                drawn.emplace_back(weight, w);
            }
        }
        if (drawn.empty()) continue;

        const std::size_t dim = std::size_t{1} << n;
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& [c, w] : drawn) s += c * pauli_word_dense(n, w);
        const auto [smin, smax] = hermitian_eigen_range(s);
        if (smax - smin < 1e-12) continue;
        const double denom = smax - kappa * smin;
        if (denom <= 1e-12) continue;
        const double xi2 = (kappa - 1.0) / denom;
        const double xi1 = 1.0 / (1.0 + xi2 * smax);

        LcuMatrix a;
        a.n = n;
        a.terms.push_back(pauli_term(n, xi1, identity_word(n)));
        for (const auto& [c, w] : drawn) {
            a.terms.push_back(pauli_term(n, xi1 * xi2 * c, w));
        }
        QlspInstance inst;
        inst.A = std::move(a);
        inst.b_prep = b_prep;
        inst.kappa = kappa;
        inst.label = "random(n=" + std::to_string(n) + ",kappa=" + std::to_string(kappa) +
                     ",seed=" + std::to_string(seed) + ")";
        return inst;
    }
    throw std::runtime_error(
        "problem: random_qlsp could not draw a rescalable matrix (is "
        "pair_probability too small?)");
}

QlspInstance degenerate_qlsp(int variant, double kappa) {
    if (kappa <= 1.0) fail("degenerate_qlsp needs kappa > 1");
    const int n = 3;
    LcuMatrix a;
    a.n = n;
    const double kp = kappa + 1.0, km = kappa - 1.0;
    switch (variant) {
        case 1:
            a.terms.push_back(pauli_term(n, kp / (2.0 * kappa), "III"));
            a.terms.push_back(pauli_term(n, km / (8.0 * kappa), "IIZ"));
            a.terms.push_back(pauli_term(n, km / (8.0 * kappa), "IZI"));
            a.terms.push_back(pauli_term(n, km / (4.0 * kappa), "ZII"));
            break;
        case 2:
            a.terms.push_back(pauli_term(n, kp / (2.0 * kappa), "III"));
            a.terms.push_back(pauli_term(n, km / (4.0 * kappa), "IIZ"));
            a.terms.push_back(pauli_term(n, km / (4.0 * kappa), "IZI"));
            break;
        case 3:
            a.terms.push_back(pauli_term(n, kp / (2.0 * kappa), "III"));
            a.terms.push_back(pauli_term(n, km / (2.0 * kappa), "IIZ"));
            break;
        default:
            fail("degenerate_qlsp variant must be 1, 2 or 3");
    }
    QlspInstance inst;
    inst.A = std::move(a);
    inst.b_prep = hadamard_all(n);
    inst.kappa = kappa;
    inst.label = "degenerate(g=" + std::to_string(1 << (variant - 1)) +
                 ",kappa=" + std::to_string(kappa) + ")";
    return inst;
}

// --- Sparse LCU construction -------------------------------------------------

namespace {

// Principal square root of conj(z); the row-side oracle amplitude. The
// column-side amplitude is its conjugate, so the two multiply back to z for
// every z including the negative real axis.
cplx row_amplitude(cplx z) { return std::sqrt(std::conj(z)); }

struct OracleUnitaryPlan {
    int n;
    int log_d;
    bool row_side;  // true: Ux layout, false: Uy layout
    const SparseOracle* oracle;
    std::vector<std::vector<std::size_t>> permutation;  // keyed register value
};

void apply_oracle_unitary(const OracleUnitaryPlan& plan, std::vector<cplx>& v) {
    const int n = plan.n;
    const int total = 2 * n + 2;
    const std::size_t dim = std::size_t{1} << total;
    const std::uint64_t reg_mask = bit(n) - 1;

    // Column superposition: Hadamards on the low log(d) qubits of the swept
    // register (register 2 for Ux, register 1 for Uy).
    const int h_base = plan.row_side ? n : 0;
    for (int b = 0; b < plan.log_d; ++b) {
        const std::uint64_t t = bit(h_base + b);
        const double r = 1.0 / std::sqrt(2.0);
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & t) continue;
            const cplx a0 = v[i], a1 = v[i | t];
            v[i] = r * (a0 + a1);
            v[i | t] = r * (a0 - a1);
        }
    }

    // Neighbor permutation on the swept register, keyed by the other one.
    std::vector<cplx> next(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t r1 = i & reg_mask;
        const std::size_t r2 = (i >> n) & reg_mask;
        const std::size_t rest = i >> (2 * n);
        std::size_t j;
        if (plan.row_side) {
            j = r1 | (plan.permutation[r1][r2] << n);
        } else {
            j = plan.permutation[r2][r1] | (r2 << n);
        }
        next[j | (rest << (2 * n))] = v[i];
    }
    v = std::move(next);

    // Flag rotation keyed by (row, column); register 4 for Ux, 3 for Uy.
    const int flag = plan.row_side ? (2 * n + 1) : (2 * n);
    const std::uint64_t f = bit(flag);
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & f) continue;
        const std::size_t r1 = i & reg_mask;
        const std::size_t r2 = (i >> n) & reg_mask;
        // Both layouts key the entry as (row = register 1, column = register 2);
        // they differ in which register was swept and in the branch of the
        // amplitude square root.
        const cplx z = plan.oracle->entry(r1, r2);
        const cplx u = plan.row_side ? row_amplitude(z) : std::conj(row_amplitude(z));
        const double w = std::sqrt(std::max(0.0, 1.0 - std::abs(z)));
        const cplx a0 = v[i], a1 = v[i | f];
        v[i] = u * a0 - w * a1;
        v[i | f] = w * a0 + std::conj(u) * a1;
    }
}

Eigen::MatrixXcd oracle_unitary_dense(const OracleUnitaryPlan& plan) {
    const std::size_t dim = std::size_t{1} << (2 * plan.n + 2);
    Eigen::MatrixXcd m(dim, dim);
    std::vector<cplx> v(dim);
    for (std::size_t col = 0; col < dim; ++col) {
        std::fill(v.begin(), v.end(), cplx{0.0, 0.0});
        v[col] = 1.0;
        apply_oracle_unitary(plan, v);
        for (std::size_t row = 0; row < dim; ++row) {
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v[row];
        }
    }
    return m;
}

}  // namespace

int sparse_lcu_total_qubits(int n, const SparseLcuOptions& options) {
    return 2 * n + 2 + options.element_register_bits;
}

LcuMatrix sparse_to_lcu(const SparseOracle& oracle, const SparseLcuOptions& options) {
    const int n = oracle.num_qubits();
    if (n > options.max_qubits) {
        fail("sparse_to_lcu builds dense oracle unitaries; raise max_qubits to "
             "go beyond " + std::to_string(options.max_qubits) + " qubits");
    }
    if (!oracle.is_hermitian()) fail("sparse_to_lcu needs a Hermitian oracle");
    if (oracle.max_entry_magnitude() > 1.0 + 1e-12) {
        fail("sparse_to_lcu needs |A_ji| <= 1");
    }
    if (options.element_register_bits < 1) fail("element register needs >= 1 bit");

    int d = 1;
    while (d < oracle.sparsity()) d *= 2;
    int log_d = 0;
    while ((1 << log_d) < d) ++log_d;

    std::vector<std::vector<std::size_t>> permutation(oracle.dim());
    for (std::size_t j = 0; j < oracle.dim(); ++j) {
        permutation[j].resize(oracle.dim());
        for (std::size_t l = 0; l < oracle.dim(); ++l) {
            permutation[j][l] = oracle.neighbor(j, l);
        }
    }

    const int total = 2 * n + 2;
    OracleUnitaryPlan ux{n, log_d, true, &oracle, permutation};
    OracleUnitaryPlan uy{n, log_d, false, &oracle, permutation};
    Eigen::MatrixXcd ux_dense = oracle_unitary_dense(ux);
    Eigen::MatrixXcd uy_dense = oracle_unitary_dense(uy);

    std::vector<int> all(total);
    for (int q = 0; q < total; ++q) all[q] = q;

    // W = Ux^dag Uy S; S swaps the two n-qubit registers.
    Circuit w(total);
    for (int q = 0; q < n; ++q) {
        w.add(Gate::cnot(q, q + n));
        w.add(Gate::cnot(q + n, q));
        w.add(Gate::cnot(q, q + n));
    }
    w.add(Gate::unitary(all, std::move(uy_dense)));
    w.add(Gate::unitary(all, ux_dense.adjoint()));

    std::vector<int> projected;
    for (int q = n; q < total; ++q) projected.push_back(q);
    const Circuit e = phase_flip_on_all_zeros(total, projected);

    const double weight = static_cast<double>(d) / 4.0;
    LcuMatrix out;
    out.n = total;
    out.terms.push_back({cplx{weight, 0.0}, w, ""});
    out.terms.push_back({cplx{-weight, 0.0}, w.then(e), ""});
    out.terms.push_back({cplx{-weight, 0.0}, e.then(w), ""});
    out.terms.push_back({cplx{weight, 0.0}, e.then(w).then(e), ""});
    return out;
}

// --- Dense reference paths ---------------------------------------------------

Eigen::MatrixXcd assemble_dense(const LcuMatrix& a) {
    if (a.n > kDenseCap) fail("assemble_dense capped at 12 qubits");
    if (a.terms.empty()) fail("empty LCU");
    const std::size_t dim = std::size_t{1} << a.n;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (const LcuTerm& t : a.terms) {
        acc += t.coeff * dense_of_circuit(t.unitary);
    }
    return acc;
}

Statevector dense_solve_oracle(const QlspInstance& instance) {
    if (instance.A.n > kDenseCap) fail("dense_solve_oracle capped at 12 qubits");
    const Eigen::MatrixXcd a = assemble_dense(instance.A);
    const Eigen::VectorXcd b = instance.b_state().to_eigen();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible()) {
        throw std::runtime_error("problem: dense solve hit a singular matrix");
    }
    Eigen::VectorXcd x = lu.solve(b);
    const double residual = (a * x - b).norm();
    if (!(residual < 1e-8 * std::max(1.0, x.norm()))) {
        throw std::runtime_error("problem: dense solve residual too large");
    }
    std::vector<cplx> amps(x.data(), x.data() + x.size());
    Statevector s = Statevector::from_amplitudes(instance.A.n, std::move(amps), true);
    s.normalize();
    s.set_allow_unnormalized(false);
    return s;
}

double estimate_kappa_dense(const LcuMatrix& a) {
    if (a.n > 10) fail("estimate_kappa_dense capped at 10 qubits");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(assemble_dense(a));
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) {
        throw std::runtime_error("problem: singular matrix has no condition number");
    }
    return sv(0) / smin;
}

}  // namespace vqls

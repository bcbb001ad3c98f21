#pragma once

// Shared test plumbing: independent dense oracles built from Kronecker
// products and projector algebra (deliberately distinct from the library's
// bitwise kernels), plus random circuit/instance generators.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqls/ansatz.hpp"
#include "vqls/problem.hpp"
#include "vqls/rng.hpp"
#include "vqls/simulator.hpp"

namespace vqls::test {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Eigen::MatrixXcd pauli1(char p) {
    Eigen::MatrixXcd m(2, 2);
    const cplx i{0.0, 1.0};
    switch (p) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -i, i, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("bad pauli char");
    }
    return m;
}

// Little-endian Kronecker build: qubit q sits at bit q, so the highest qubit
// is the leftmost kron factor.
inline Eigen::MatrixXcd kron_pauli_word(int n, const std::string& word) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = n - 1; q >= 0; --q) {
        const char p = q < static_cast<int>(word.size()) ? word[static_cast<std::size_t>(q)] : 'I';
        m = kron(m, pauli1(p));
    }
    return m;
}

// Single-qubit operator embedded at qubit q of an n-qubit register.
inline Eigen::MatrixXcd embed1(int n, int q, const Eigen::MatrixXcd& g) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int k = n - 1; k >= 0; --k) {
        m = kron(m, k == q ? g : Eigen::MatrixXcd::Identity(2, 2));
    }
    return m;
}

inline Eigen::MatrixXcd projector1(int n, int q, int value) {
    Eigen::MatrixXcd p(2, 2);
    p.setZero();
    p(value, value) = 1.0;
    return embed1(n, q, p);
}

// Full-register matrix of one gate, assembled from kron/projector algebra.
inline Eigen::MatrixXcd dense_gate_oracle(int n, const Gate& g) {
    const std::size_t dim = std::size_t{1} << n;
    const cplx i{0.0, 1.0};
    switch (g.kind) {
        case GateKind::RotY: {
            Eigen::MatrixXcd m(2, 2);
            m << std::cos(g.theta / 2), -std::sin(g.theta / 2),
                std::sin(g.theta / 2), std::cos(g.theta / 2);
            return embed1(n, g.targets[0], m);
        }
        case GateKind::RotZ: {
            Eigen::MatrixXcd m(2, 2);
            m << std::exp(-i * (g.theta / 2)), 0.0, 0.0, std::exp(i * (g.theta / 2));
            return embed1(n, g.targets[0], m);
        }
        case GateKind::Hadamard: {
            Eigen::MatrixXcd m(2, 2);
            const double r = 1.0 / std::sqrt(2.0);
            m << r, r, r, -r;
            return embed1(n, g.targets[0], m);
        }
        case GateKind::PauliX: return embed1(n, g.targets[0], pauli1('X'));
        case GateKind::PauliY: return embed1(n, g.targets[0], pauli1('Y'));
        case GateKind::PauliZ: return embed1(n, g.targets[0], pauli1('Z'));
        case GateKind::Phase: {
            Eigen::MatrixXcd m(2, 2);
            m << 1.0, 0.0, 0.0, std::exp(i * g.theta);
            return embed1(n, g.targets[0], m);
        }
        case GateKind::ControlledZ:
            return Eigen::MatrixXcd::Identity(dim, dim) -
                   2.0 * projector1(n, g.targets[0], 1) * projector1(n, g.targets[1], 1);
        case GateKind::ControlledNot:
            return projector1(n, g.targets[0], 0) +
                   projector1(n, g.targets[0], 1) *
                       embed1(n, g.targets[1], pauli1('X'));
        case GateKind::ControlledUnitary: {
            Eigen::MatrixXcd body = Eigen::MatrixXcd::Identity(dim, dim);
            for (const Gate& inner : g.inner) {
                body = dense_gate_oracle(n, inner) * body;
            }
            return projector1(n, g.targets[0], 0) +
                   projector1(n, g.targets[0], 1) * body;
        }
        case GateKind::Unitary:
        case GateKind::Evolution:
            throw std::invalid_argument("oracle covers the closed gate alphabet only");
    }
    throw std::invalid_argument("unhandled gate");
}

inline Eigen::MatrixXcd dense_circuit_oracle(const Circuit& c) {
    const std::size_t dim = std::size_t{1} << c.n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
    for (const Gate& g : c.gates) m = dense_gate_oracle(c.n, g) * m;
    return m;
}

// Random circuit over the closed alphabet; real_only restricts to gates with
// real matrices.
inline Circuit random_circuit(int n, int depth, Rng& rng, bool real_only = false) {
    Circuit c(n);
    const int kinds = real_only ? 6 : 9;
    for (int k = 0; k < depth; ++k) {
        const int pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(kinds)));
        const int q = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        switch (pick) {
            case 0: c.add(Gate::ry(q, rng.uniform(-3.14, 3.14))); break;
            case 1: c.add(Gate::h(q)); break;
            case 2: c.add(Gate::x(q)); break;
            case 3: c.add(Gate::z(q)); break;
            case 4: {
                if (n < 2) { c.add(Gate::x(q)); break; }
                const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
                c.add(Gate::cz(a, a + 1));
                break;
            }
            case 5: {
                if (n < 2) { c.add(Gate::z(q)); break; }
                const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
                c.add(rng.bernoulli(0.5) ? Gate::cnot(a, a + 1) : Gate::cnot(a + 1, a));
                break;
            }
            case 6: c.add(Gate::rz(q, rng.uniform(-3.14, 3.14))); break;
            case 7: c.add(Gate::y(q)); break;
            case 8: c.add(Gate::phase(q, rng.uniform(-3.14, 3.14))); break;
        }
    }
    return c;
}

inline std::string random_pauli_word(int n, Rng& rng, bool allow_identity = true) {
    const char axes[4] = {'I', 'X', 'Y', 'Z'};
    std::string w(static_cast<std::size_t>(n), 'I');
    do {
        for (int q = 0; q < n; ++q) {
            w[static_cast<std::size_t>(q)] = axes[rng.uniform_index(4)];
        }
    } while (!allow_identity && w.find_first_not_of('I') == std::string::npos);
    return w;
}

// Arbitrary LCU instance (not necessarily invertible) for term-level and
// backend-equivalence tests.
inline QlspInstance random_pauli_instance(int n, int terms, Rng& rng,
                                          bool complex_coeffs = true) {
    QlspInstance inst;
    inst.A.n = n;
    for (int l = 0; l < terms; ++l) {
        const cplx coeff = complex_coeffs
                               ? cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}
                               : cplx{rng.uniform(-1.0, 1.0), 0.0};
        inst.A.terms.push_back(pauli_term(n, coeff, random_pauli_word(n, rng)));
    }
    inst.b_prep = random_circuit(n, 3 * n, rng);
    inst.label = "random-pauli";
    return inst;
}

}  // namespace vqls::test

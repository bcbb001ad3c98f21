#include "vqls/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vqls/rng.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("simulator: " + msg);
}

std::uint64_t bit(int q) { return std::uint64_t{1} << q; }

struct Mat2 {
    cplx m00, m01, m10, m11;
};

Mat2 single_qubit_matrix(const Gate& g) {
    const cplx i{0.0, 1.0};
    switch (g.kind) {
        case GateKind::RotY: {
            const double c = std::cos(g.theta / 2), s = std::sin(g.theta / 2);
            return {c, -s, s, c};
        }
        case GateKind::RotZ: {
            const cplx e = std::exp(-i * (g.theta / 2));
            return {e, 0.0, 0.0, std::conj(e)};
        }
        case GateKind::Hadamard: {
            const double r = 1.0 / std::sqrt(2.0);
            return {r, r, r, -r};
        }
        case GateKind::PauliX:
            return {0.0, 1.0, 1.0, 0.0};
        case GateKind::PauliY:
            return {0.0, -i, i, 0.0};
        case GateKind::PauliZ:
            return {1.0, 0.0, 0.0, -1.0};
        case GateKind::Phase:
            return {1.0, 0.0, 0.0, std::exp(i * g.theta)};
        default:
            fail("not a single-qubit gate");
    }
}

void check_targets(const Gate& g, int n) {
    for (int q : g.targets) {
        if (q < 0 || q >= n) fail("target qubit out of range");
    }
    std::vector<int> sorted = g.targets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        fail("duplicate target qubits");
    }
}

void apply_masked(std::vector<cplx>& a, int n, const Gate& g,
                  std::uint64_t cmask);

void apply_single_qubit(std::vector<cplx>& a, int q, const Mat2& m,
                        std::uint64_t cmask) {
    const std::uint64_t t = bit(q);
    const std::uint64_t dim = a.size();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & t) || (i & cmask) != cmask) continue;
        const cplx a0 = a[i], a1 = a[i | t];
        a[i] = m.m00 * a0 + m.m01 * a1;
        a[i | t] = m.m10 * a0 + m.m11 * a1;
    }
}

// Gathers the 2^k sub-block addressed by `targets`, applies `body`, scatters.
template <typename Body>
void apply_block(std::vector<cplx>& a, const std::vector<int>& targets,
                 std::uint64_t cmask, Body&& body) {
    const int k = static_cast<int>(targets.size());
    const std::uint64_t sub = std::uint64_t{1} << k;
    std::uint64_t tmask = 0;
    for (int q : targets) tmask |= bit(q);
    Eigen::VectorXcd x(sub);
    const std::uint64_t dim = a.size();
    for (std::uint64_t base = 0; base < dim; ++base) {
        if ((base & tmask) || (base & cmask) != cmask) continue;
        for (std::uint64_t s = 0; s < sub; ++s) {
            std::uint64_t idx = base;
            for (int b = 0; b < k; ++b) {
                if (s & (std::uint64_t{1} << b)) idx |= bit(targets[b]);
            }
            x[static_cast<Eigen::Index>(s)] = a[idx];
        }
        body(x);
        for (std::uint64_t s = 0; s < sub; ++s) {
            std::uint64_t idx = base;
            for (int b = 0; b < k; ++b) {
                if (s & (std::uint64_t{1} << b)) idx |= bit(targets[b]);
            }
            a[idx] = x[static_cast<Eigen::Index>(s)];
        }
    }
}

void apply_evolution(std::vector<cplx>& a, int n, const Gate& g,
                     std::uint64_t cmask) {
    const auto& gen = *g.generator;
    const Eigen::Index dim = gen.eigenvalues.size();
    if (dim != (Eigen::Index{1} << g.targets.size())) {
        fail("evolution generator dimension does not match target count");
    }
    const cplx i{0.0, 1.0};
    Eigen::VectorXcd phases(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        phases[k] = std::exp(-i * (gen.eigenvalues[k] * g.theta));
    }
    auto evolve = [&](Eigen::VectorXcd& x) {
        Eigen::VectorXcd y = gen.eigenvectors.adjoint() * x;
        y.array() *= phases.array();
        x = gen.eigenvectors * y;
    };
    if (cmask == 0 && static_cast<int>(g.targets.size()) == n) {
        // Whole-register evolution: operate on the buffer directly.
        bool contiguous = true;
        for (int q = 0; q < n; ++q) contiguous &= (g.targets[q] == q);
        if (contiguous) {
            Eigen::Map<Eigen::VectorXcd> x(a.data(),
                                           static_cast<Eigen::Index>(a.size()));
            Eigen::VectorXcd v = x;
            evolve(v);
            x = v;
            return;
        }
    }
    apply_block(a, g.targets, cmask, evolve);
}

void apply_masked(std::vector<cplx>& a, int n, const Gate& g,
                  std::uint64_t cmask) {
    check_targets(g, n);
    const std::uint64_t dim = a.size();
    switch (g.kind) {
        case GateKind::RotY:
        case GateKind::RotZ:
        case GateKind::Hadamard:
        case GateKind::PauliX:
        case GateKind::PauliY:
        case GateKind::PauliZ:
        case GateKind::Phase:
            if (g.targets.size() != 1) fail("expected one target");
            apply_single_qubit(a, g.targets[0], single_qubit_matrix(g), cmask);
            return;
        case GateKind::ControlledZ: {
            if (g.targets.size() != 2) fail("CZ expects two targets");
            const std::uint64_t m = bit(g.targets[0]) | bit(g.targets[1]);
            for (std::uint64_t i = 0; i < dim; ++i) {
                if ((i & m) == m && (i & cmask) == cmask) a[i] = -a[i];
            }
            return;
        }
        case GateKind::ControlledNot: {
            if (g.targets.size() != 2) fail("CNOT expects control and target");
            const std::uint64_t c = bit(g.targets[0]), t = bit(g.targets[1]);
            for (std::uint64_t i = 0; i < dim; ++i) {
                if ((i & c) && !(i & t) && (i & cmask) == cmask) {
                    std::swap(a[i], a[i | t]);
                }
            }
            return;
        }
        case GateKind::ControlledUnitary: {
            if (g.targets.size() != 1) fail("controlled block expects one control");
            const int control = g.targets[0];
            for (const Gate& inner : g.inner) {
                for (int q : inner.touched_qubits()) {
                    if (q == control) fail("controlled block touches its own control");
                }
            }
            const std::uint64_t extended = cmask | bit(control);
            for (const Gate& inner : g.inner) {
                apply_masked(a, n, inner, extended);
            }
            return;
        }
        case GateKind::Unitary: {
            if (!g.matrix) fail("unitary gate has no matrix");
            const Eigen::Index want = Eigen::Index{1} << g.targets.size();
            if (g.matrix->rows() != want || g.matrix->cols() != want) {
                fail("unitary matrix dimension does not match target count");
            }
            apply_block(a, g.targets, cmask,
                        [&](Eigen::VectorXcd& x) { x = (*g.matrix) * x; });
            return;
        }
        case GateKind::Evolution: {
            if (!g.generator) fail("evolution gate has no generator");
            apply_evolution(a, n, g, cmask);
            return;
        }
    }
    fail("unhandled gate kind");
}

Gate remap_gate(const Gate& g, const std::vector<int>& map) {
    Gate out = g;
    for (int& q : out.targets) q = map.at(static_cast<std::size_t>(q));
    for (Gate& inner : out.inner) inner = remap_gate(inner, map);
    return out;
}

}  // namespace

// --- Statevector ------------------------------------------------------------

Statevector::Statevector(int n, bool allow_unnormalized, int qubit_cap)
    : n_(n), allow_unnormalized_(allow_unnormalized) {
    if (n < 0) fail("negative qubit count");
    if (n > qubit_cap) {
        fail("qubit count " + std::to_string(n) + " exceeds cap " +
             std::to_string(qubit_cap));
    }
    amps_.assign(std::size_t{1} << n, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

Statevector Statevector::from_amplitudes(int n, std::vector<cplx> amps,
                                         bool allow_unnormalized) {
    if (amps.size() != (std::size_t{1} << n)) {
        fail("amplitude count must be exactly 2^n");
    }
    Statevector s;
    s.n_ = n;
    s.allow_unnormalized_ = allow_unnormalized;
    s.amps_ = std::move(amps);
    return s;
}

double Statevector::norm_sq() const {
    double acc = 0.0;
    for (const cplx& a : amps_) acc += std::norm(a);
    return acc;
}

double Statevector::norm() const { return std::sqrt(norm_sq()); }

void Statevector::normalize() {
    const double nrm = norm();
    if (nrm <= 0.0) fail("cannot normalize the zero vector");
    for (cplx& a : amps_) a /= nrm;
}

Eigen::VectorXcd Statevector::to_eigen() const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(amps_.size()));
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = amps_[i];
    }
    return v;
}

// --- Gate -------------------------------------------------------------------

Gate Gate::ry(int q, double theta) { return {GateKind::RotY, {q}, theta, {}, nullptr, nullptr}; }
Gate Gate::rz(int q, double theta) { return {GateKind::RotZ, {q}, theta, {}, nullptr, nullptr}; }
Gate Gate::h(int q) { return {GateKind::Hadamard, {q}, 0.0, {}, nullptr, nullptr}; }
Gate Gate::x(int q) { return {GateKind::PauliX, {q}, 0.0, {}, nullptr, nullptr}; }
Gate Gate::y(int q) { return {GateKind::PauliY, {q}, 0.0, {}, nullptr, nullptr}; }
Gate Gate::z(int q) { return {GateKind::PauliZ, {q}, 0.0, {}, nullptr, nullptr}; }
Gate Gate::phase(int q, double theta) { return {GateKind::Phase, {q}, theta, {}, nullptr, nullptr}; }
Gate Gate::cz(int a, int b) { return {GateKind::ControlledZ, {a, b}, 0.0, {}, nullptr, nullptr}; }
Gate Gate::cnot(int control, int target) {
    return {GateKind::ControlledNot, {control, target}, 0.0, {}, nullptr, nullptr};
}
Gate Gate::controlled(int control, std::vector<Gate> body) {
    return {GateKind::ControlledUnitary, {control}, 0.0, std::move(body), nullptr, nullptr};
}
Gate Gate::unitary(std::vector<int> targets, Eigen::MatrixXcd m) {
    Gate g{GateKind::Unitary, std::move(targets), 0.0, {}, nullptr, nullptr};
    g.matrix = std::make_shared<const Eigen::MatrixXcd>(std::move(m));
    return g;
}
Gate Gate::evolution(std::shared_ptr<const EvolutionGenerator> gen,
                     std::vector<int> targets, double time) {
    Gate g{GateKind::Evolution, std::move(targets), time, {}, nullptr, nullptr};
    g.generator = std::move(gen);
    return g;
}

Gate Gate::adjoint() const {
    Gate out = *this;
    switch (kind) {
        case GateKind::RotY:
        case GateKind::RotZ:
        case GateKind::Phase:
        case GateKind::Evolution:
            out.theta = -theta;
            return out;
        case GateKind::Hadamard:
        case GateKind::PauliX:
        case GateKind::PauliY:
        case GateKind::PauliZ:
        case GateKind::ControlledZ:
        case GateKind::ControlledNot:
            return out;
        case GateKind::ControlledUnitary: {
            out.inner.clear();
            for (auto it = inner.rbegin(); it != inner.rend(); ++it) {
                out.inner.push_back(it->adjoint());
            }
            return out;
        }
        case GateKind::Unitary:
            out.matrix = std::make_shared<const Eigen::MatrixXcd>(matrix->adjoint());
            return out;
    }
    fail("unhandled gate kind in adjoint");
}

std::vector<int> Gate::touched_qubits() const {
    std::vector<int> qs = targets;
    for (const Gate& g : inner) {
        for (int q : g.touched_qubits()) qs.push_back(q);
    }
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    return qs;
}

Gate Gate::shifted(int offset) const {
    Gate out = *this;
    for (int& q : out.targets) q += offset;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        out.inner[i] = inner[i].shifted(offset);
    }
    return out;
}

Eigen::MatrixXcd Gate::block_matrix() const {
    const std::vector<int> block = touched_qubits();
    const int m = static_cast<int>(block.size());
    std::vector<int> map(static_cast<std::size_t>(block.back()) + 1, -1);
    for (int r = 0; r < m; ++r) map[static_cast<std::size_t>(block[r])] = r;
    const Gate local = remap_gate(*this, map);
    const std::size_t dim = std::size_t{1} << m;
    Eigen::MatrixXcd out(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<cplx> a(dim, cplx{0.0, 0.0});
        a[col] = 1.0;
        apply_masked(a, m, local, 0);
        for (std::size_t row = 0; row < dim; ++row) {
            out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = a[row];
        }
    }
    return out;
}

// --- Circuit ----------------------------------------------------------------

Circuit Circuit::adjoint() const {
    Circuit out(n);
    out.gates.reserve(gates.size());
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        out.gates.push_back(it->adjoint());
    }
    return out;
}

Circuit Circuit::shifted(int new_n, int offset) const {
    if (new_n < n + offset) fail("shifted circuit does not fit target register");
    Circuit out(new_n);
    out.gates.reserve(gates.size());
    for (const Gate& g : gates) out.gates.push_back(g.shifted(offset));
    return out;
}

Circuit Circuit::then(const Circuit& rhs) const {
    if (rhs.n != n) fail("circuit concatenation dimension mismatch");
    Circuit out = *this;
    out.gates.insert(out.gates.end(), rhs.gates.begin(), rhs.gates.end());
    return out;
}

// --- Operations -------------------------------------------------------------

void apply_gate(Statevector& state, const Gate& g) {
    apply_masked(state.amplitudes(), state.num_qubits(), g, 0);
}

Statevector apply_gate(const Statevector& state, const Gate& g) {
    Statevector out = state;
    apply_gate(out, g);
    return out;
}

Statevector run_circuit(const Circuit& c, const Statevector& initial) {
    if (c.n != initial.num_qubits()) {
        fail("circuit and state qubit counts differ");
    }
    Statevector out = initial;
    for (const Gate& g : c.gates) {
        apply_masked(out.amplitudes(), out.num_qubits(), g, 0);
    }
    if (!out.allow_unnormalized()) {
        const double drift = std::abs(out.norm() - 1.0);
        if (drift > 1e-10) {
            throw std::runtime_error(
                "simulator: norm drift " + std::to_string(drift) +
                " after circuit run on a normalized state");
        }
    }
    return out;
}

cplx inner_product(const Statevector& a, const Statevector& b) {
    if (a.num_qubits() != b.num_qubits()) fail("inner product dimension mismatch");
    cplx acc{0.0, 0.0};
    const auto& va = a.amplitudes();
    const auto& vb = b.amplitudes();
    for (std::size_t i = 0; i < va.size(); ++i) acc += std::conj(va[i]) * vb[i];
    return acc;
}

double expectation_pauli(const Statevector& state, std::string_view pauli) {
    const int n = state.num_qubits();
    if (static_cast<int>(pauli.size()) > n) {
        fail("pauli word longer than register");
    }
    std::uint64_t xmask = 0, zmask = 0;
    int ny = 0;
    for (std::size_t q = 0; q < pauli.size(); ++q) {
        switch (pauli[q]) {
            case 'I': break;
            case 'X': xmask |= bit(static_cast<int>(q)); break;
            case 'Y': xmask |= bit(static_cast<int>(q)); zmask |= bit(static_cast<int>(q)); ++ny; break;
            case 'Z': zmask |= bit(static_cast<int>(q)); break;
            default: fail("pauli word may contain only I, X, Y, Z");
        }
    }
    // P|i> = i^{ny} * (-1)^{popcount(i & zmask)} |i ^ xmask>.
    const cplx iu{0.0, 1.0};
    cplx yfactor{1.0, 0.0};
    for (int k = 0; k < ny; ++k) yfactor *= iu;
    const auto& a = state.amplitudes();
    cplx acc{0.0, 0.0};
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        const int par = __builtin_popcountll(i & zmask) & 1;
        const cplx phase = par ? -yfactor : yfactor;
        acc += std::conj(a[i ^ xmask]) * phase * a[i];
    }
    return acc.real();
}

Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
    if (c.n > 12) fail("circuit_unitary capped at 12 qubits");
    const std::size_t dim = std::size_t{1} << c.n;
    Eigen::MatrixXcd u(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<cplx> a(dim, cplx{0.0, 0.0});
        a[col] = 1.0;
        for (const Gate& g : c.gates) apply_masked(a, c.n, g, 0);
        for (std::size_t row = 0; row < dim; ++row) {
            u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = a[row];
        }
    }
    return u;
}

// --- Helpers ----------------------------------------------------------------

Statevector zero_state(int n) { return Statevector(n); }

namespace {

// Wraps `body` in X gates so it fires when `controls[i]` is in state
// `values[i]`, building nested ControlledUnitary blocks.
std::vector<Gate> controlled_on_pattern(const std::vector<int>& controls,
                                        const std::vector<bool>& values,
                                        std::vector<Gate> body) {
    for (std::size_t k = controls.size(); k-- > 0;) {
        std::vector<Gate> wrapped;
        if (!values[k]) wrapped.push_back(Gate::x(controls[k]));
        wrapped.push_back(Gate::controlled(controls[k], std::move(body)));
        if (!values[k]) wrapped.push_back(Gate::x(controls[k]));
        body = std::move(wrapped);
    }
    return body;
}

}  // namespace

Circuit state_preparation_circuit(const std::vector<cplx>& target) {
    int n = 0;
    while ((std::size_t{1} << n) < target.size()) ++n;
    if ((std::size_t{1} << n) != target.size()) {
        fail("state preparation target length must be a power of two");
    }
    Circuit c(n);

    // RotY tree: qubit k is rotated to split the norm of each (high-bit
    // prefix) subtree between its bit-0 and bit-1 halves.
    for (int k = n - 1; k >= 0; --k) {
        const int prefix_bits = n - 1 - k;
        std::vector<int> controls;
        for (int q = n - 1; q > k; --q) controls.push_back(q);
        for (std::uint64_t p = 0; p < (std::uint64_t{1} << prefix_bits); ++p) {
            double w0 = 0.0, w1 = 0.0;
            const std::uint64_t lo = std::uint64_t{1} << k;
            for (std::uint64_t rest = 0; rest < lo; ++rest) {
                // Index layout: [prefix bits | bit k | rest].
                std::uint64_t idx = rest;
                for (int b = 0; b < prefix_bits; ++b) {
                    if (p & (std::uint64_t{1} << b)) idx |= bit(n - 1 - b);
                }
                w0 += std::norm(target[idx]);
                w1 += std::norm(target[idx | lo]);
            }
            if (w0 + w1 <= 0.0) continue;
            const double theta = 2.0 * std::atan2(std::sqrt(w1), std::sqrt(w0));
            if (theta == 0.0) continue;
            std::vector<bool> values;
            for (int b = 0; b < prefix_bits; ++b) {
                values.push_back((p & (std::uint64_t{1} << b)) != 0);
            }
            auto gates = controlled_on_pattern(controls, values,
                                               {Gate::ry(k, theta)});
            for (Gate& g : gates) c.add(std::move(g));
        }
    }

    // Per-basis-state phases recover arg(target[x]) exactly.
    for (std::uint64_t x = 0; x < target.size(); ++x) {
        if (std::abs(target[x]) <= 0.0) continue;
        const double phi = std::arg(target[x]);
        if (phi == 0.0) continue;
        std::vector<int> controls;
        std::vector<bool> values;
        for (int q = n - 1; q >= 1; --q) {
            controls.push_back(q);
            values.push_back((x & bit(q)) != 0);
        }
        std::vector<Gate> body;
        if (x & 1) {
            body.push_back(Gate::phase(0, phi));
        } else {
            body.push_back(Gate::x(0));
            body.push_back(Gate::phase(0, phi));
            body.push_back(Gate::x(0));
        }
        auto gates = controlled_on_pattern(controls, values, std::move(body));
        for (Gate& g : gates) c.add(std::move(g));
    }
    return c;
}

Circuit pauli_word_circuit(int n, std::string_view pauli) {
    if (static_cast<int>(pauli.size()) > n) fail("pauli word longer than register");
    Circuit c(n);
    for (std::size_t q = 0; q < pauli.size(); ++q) {
        switch (pauli[q]) {
            case 'I': break;
            case 'X': c.add(Gate::x(static_cast<int>(q))); break;
            case 'Y': c.add(Gate::y(static_cast<int>(q))); break;
            case 'Z': c.add(Gate::z(static_cast<int>(q))); break;
            default: fail("pauli word may contain only I, X, Y, Z");
        }
    }
    return c;
}

Circuit phase_flip_on_all_zeros(int n, const std::vector<int>& qubits) {
    if (qubits.empty()) fail("phase flip needs at least one qubit");
    Circuit c(n);
    for (int q : qubits) c.add(Gate::x(q));
    if (qubits.size() == 1) {
        c.add(Gate::z(qubits[0]));
    } else {
        std::vector<Gate> body = {
            Gate::cz(qubits[qubits.size() - 2], qubits[qubits.size() - 1])};
        for (std::size_t k = qubits.size() - 2; k-- > 0;) {
            body = {Gate::controlled(qubits[k], std::move(body))};
        }
        for (Gate& g : body) c.add(std::move(g));
    }
    for (int q : qubits) c.add(Gate::x(q));
    return c;
}

Statevector random_state(int n, Rng& rng, bool real_amplitudes) {
    std::vector<cplx> amps(std::size_t{1} << n);
    for (cplx& a : amps) {
        a = real_amplitudes ? cplx{rng.normal(), 0.0}
                            : cplx{rng.normal(), rng.normal()};
    }
    Statevector s = Statevector::from_amplitudes(n, std::move(amps), true);
    s.normalize();
    s.set_allow_unnormalized(false);
    return s;
}

}  // namespace vqls

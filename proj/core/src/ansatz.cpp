#include "vqls/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "vqls/rng.hpp"

namespace vqls {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("ansatz: " + msg);
}

AnsatzSlot ry_slot(int q, int param) {
    return {Gate::ry(q, 0.0), param, false, true};
}

AnsatzSlot rz_slot(int q, int param) {
    return {Gate::rz(q, 0.0), param, false, true};
}

AnsatzSlot fixed_slot(Gate g) { return {std::move(g), -1, false, true}; }

}  // namespace

std::string to_string(AnsatzFamily f) {
    switch (f) {
        case AnsatzFamily::Hea: return "hea";
        case AnsatzFamily::Qaoa: return "qaoa";
        case AnsatzFamily::Variable: return "variable";
    }
    return "?";
}

std::size_t Ansatz::num_parameters() const {
    int max_index = -1;
    for (const AnsatzSlot& s : structure) max_index = std::max(max_index, s.param);
    return static_cast<std::size_t>(max_index + 1);
}

bool Ansatz::all_shift_compatible() const {
    for (const AnsatzSlot& s : structure) {
        if (s.param >= 0 && !s.shift_compatible) return false;
    }
    return true;
}

Circuit Ansatz::bind(std::span<const double> alpha) const {
    if (alpha.size() != num_parameters()) {
        fail("parameter vector length " + std::to_string(alpha.size()) +
             " does not match ansatz parameter count " +
             std::to_string(num_parameters()));
    }
    Circuit c(n);
    for (const AnsatzSlot& s : structure) {
        Gate g = s.gate;
        if (s.param >= 0) {
            g.theta = alpha[static_cast<std::size_t>(s.param)];
            if (s.driver) g.theta *= driver_scale;
        }
        c.add(std::move(g));
    }
    return c;
}

// --- Hardware-efficient ansatz ------------------------------------------------

Ansatz build_hea(int n, int layers, bool extended_alphabet) {
    if (n < 2) fail("build_hea needs n >= 2");
    if (layers < 1) fail("build_hea needs layers >= 1");
    Ansatz a;
    a.n = n;
    a.family = AnsatzFamily::Hea;
    int next = 0;
    auto rotation_column = [&](const std::vector<int>& qubits) {
        for (int q : qubits) {
            a.structure.push_back(ry_slot(q, next++));
            if (extended_alphabet) a.structure.push_back(rz_slot(q, next++));
        }
    };
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) all[static_cast<std::size_t>(q)] = q;
    rotation_column(all);
    for (int layer = 0; layer < layers; ++layer) {
        for (int parity = 0; parity < 2; ++parity) {
            std::vector<int> touched;
            for (int q = parity; q + 1 < n; q += 2) {
                a.structure.push_back(fixed_slot(Gate::cz(q, q + 1)));
                touched.push_back(q);
                touched.push_back(q + 1);
            }
            rotation_column(touched);
        }
    }
    a.parameters.assign(static_cast<std::size_t>(next), 0.0);
    return a;
}

// --- QAOA ----------------------------------------------------------------------

Ansatz build_qaoa(const QlspInstance& inst, const QaoaSpec& spec) {
    const int n = inst.A.n;
    if (n > 12) fail("build_qaoa dense exponentials capped at 12 qubits");
    if (spec.rounds < 1) fail("build_qaoa needs rounds >= 1");
    if (spec.driver_scale <= 0.0) fail("driver_scale must be positive");

    auto decompose = [](const Eigen::MatrixXcd& h, const std::string& label) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        if (es.info() != Eigen::Success) fail("eigendecomposition failed");
        auto gen = std::make_shared<EvolutionGenerator>();
        gen->eigenvectors = es.eigenvectors();
        gen->eigenvalues = es.eigenvalues();
        gen->label = label;
        return gen;
    };
    const auto driver = decompose(effective_hamiltonian(inst, spec.driver),
                                  is_global(spec.driver) ? "H_G" : "H_L");
    const auto mixer = decompose(
        pauli_word_dense(n, std::string(static_cast<std::size_t>(n), 'X')), "H_M");

    Ansatz a;
    a.n = n;
    a.family = AnsatzFamily::Qaoa;
    a.driver_scale = spec.driver_scale;
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) all[static_cast<std::size_t>(q)] = q;
    for (int q = 0; q < n; ++q) a.structure.push_back(fixed_slot(Gate::h(q)));
    int next = 0;
    for (int round = 0; round < spec.rounds; ++round) {
        AnsatzSlot d{Gate::evolution(driver, all, 0.0), next++, true, false};
        a.structure.push_back(std::move(d));
        AnsatzSlot m{Gate::evolution(mixer, all, 0.0), next++, false, false};
        a.structure.push_back(std::move(m));
    }
    a.parameters.assign(static_cast<std::size_t>(next), 0.0);
    return a;
}

// --- Product and variable-structure families ------------------------------------

Ansatz build_product(int n) {
    if (n < 1) fail("build_product needs n >= 1");
    Ansatz a;
    a.n = n;
    a.family = AnsatzFamily::Variable;
    for (int q = 0; q < n; ++q) a.structure.push_back(ry_slot(q, q));
    a.parameters.assign(static_cast<std::size_t>(n), 0.0);
    return a;
}

Ansatz random_variable_ansatz(int n, int blocks, Rng& rng,
                              bool extended_alphabet) {
    if (n < 2) fail("random_variable_ansatz needs n >= 2");
    Ansatz a;
    a.n = n;
    a.family = AnsatzFamily::Variable;
    a.extended_alphabet = extended_alphabet;
    int next = 0;
    for (int q = 0; q < n; ++q) {
        a.structure.push_back(ry_slot(q, next++));
        if (extended_alphabet) a.structure.push_back(rz_slot(q, next++));
    }
    a.parameters.assign(static_cast<std::size_t>(next), 0.0);
    for (int b = 0; b < blocks; ++b) {
        a = grow_variable(a, rng.next_u64());
    }
    return a;
}

Statevector prepare_state(const Ansatz& a, std::span<const double> alpha) {
    return run_circuit(a.bind(alpha), zero_state(a.n));
}

Ansatz grow_variable(const Ansatz& a, std::uint64_t seed) {
    if (a.family != AnsatzFamily::Variable) {
        fail("grow_variable needs a variable-structure ansatz");
    }
    if (a.n < 2) fail("grow_variable needs n >= 2 (a neighbor edge)");
    Rng rng(seed);
    const int edge = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(a.n - 1)));
    const int q = rng.bernoulli(0.5) ? edge : edge + 1;
    const std::size_t position = rng.uniform_index(a.structure.size() + 1);

    Ansatz out = a;
    int next = static_cast<int>(out.num_parameters());
    std::vector<AnsatzSlot> block;
    auto rotation = [&](int qubit) {
        block.push_back(ry_slot(qubit, next++));
        if (a.extended_alphabet) block.push_back(rz_slot(qubit, next++));
    };
    rotation(q);
    block.push_back(fixed_slot(Gate::cz(edge, edge + 1)));
    rotation(q);
    block.push_back(fixed_slot(Gate::cz(edge, edge + 1)));
    out.structure.insert(out.structure.begin() + static_cast<std::ptrdiff_t>(position),
                         block.begin(), block.end());
    out.parameters.resize(static_cast<std::size_t>(next), 0.0);
    return out;
}

}  // namespace vqls

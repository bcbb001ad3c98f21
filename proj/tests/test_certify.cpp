#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "vqls/certify.hpp"
#include "vqls/cost.hpp"
#include "vqls/problem.hpp"
#include "vqls/rng.hpp"

using namespace vqls;

TEST_CASE("pure-state trace distance") {
    Rng rng(61);
    const Statevector x = random_state(3, rng);
    CHECK(trace_distance_pure(x, x) <= 1e-7);  // sqrt amplifies roundoff

    Statevector zero = zero_state(1);
    Statevector one = zero_state(1);
    apply_gate(one, Gate::x(0));
    CHECK(trace_distance_pure(zero, one) == doctest::Approx(1.0));

    // Overlap 0.8 gives distance 0.6.
    std::vector<cplx> mix = {0.8, 0.6};
    const Statevector mixed = Statevector::from_amplitudes(1, std::move(mix));
    CHECK(trace_distance_pure(mixed, zero) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK_THROWS_AS(trace_distance_pure(zero, zero_state(2)), std::invalid_argument);
}

TEST_CASE("epsilon bounds invert the certified inequalities") {
    CHECK(epsilon_bound_value(CostKind::GlobalHat, 1e-6, 1.0, 10.0, 4) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK(epsilon_bound_value(CostKind::Global, 1e-6, 0.7, 10.0, 4) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK(epsilon_bound_value(CostKind::LocalHat, 1e-6, 1.0, 10.0, 4) ==
          doctest::Approx(0.02).epsilon(1e-12));
    // Local uses the tightened inverse with <psi|psi>.
    CHECK(epsilon_bound_value(CostKind::Local, 1e-6, 0.25, 10.0, 4) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK(epsilon_bound_value(CostKind::Global, 0.0, 1.0, 10.0, 4) == 0.0);
    CHECK(epsilon_bound_value(CostKind::Global, 0.9, 1.0, 10.0, 4) == 1.0);  // clipped
    CHECK_THROWS_AS(epsilon_bound_value(CostKind::Global, 0.1, 1.0, 1.0, 4),
                    std::invalid_argument);
}

TEST_CASE("epsilon bound is monotone in cost and kappa") {
    double prev = 0.0;
    for (double c : {1e-8, 1e-6, 1e-4, 1e-2}) {
        const double eps = epsilon_bound_value(CostKind::Local, c, 0.9, 5.0, 3);
        CHECK(eps >= prev);
        prev = eps;
    }
    prev = 0.0;
    for (double kappa : {1.5, 3.0, 10.0, 40.0}) {
        const double eps = epsilon_bound_value(CostKind::Global, 1e-5, 1.0, kappa, 3);
        CHECK(eps >= prev);
        prev = eps;
    }
}

TEST_CASE("observable deviations against the supplementary ground truths") {
    // A = H, |b> = X|0>: the solution has <Z> = 0.
    QlspInstance hadamard_problem;
    hadamard_problem.A.n = 1;
    hadamard_problem.A.terms.push_back(pauli_term(1, 1.0 / std::sqrt(2.0), "X"));
    hadamard_problem.A.terms.push_back(pauli_term(1, 1.0 / std::sqrt(2.0), "Z"));
    hadamard_problem.b_prep = Circuit(1, {Gate::x(0)});
    const Statevector x0_h = dense_solve_oracle(hadamard_problem);
    CHECK(std::abs(expectation_pauli(x0_h, "Z")) <= 1e-12);

    // A = I + 0.25 Z, |b> = X|0>: the solution is |1> with <Z> = -1.
    QlspInstance shifted;
    shifted.A.n = 1;
    shifted.A.terms.push_back(pauli_term(1, 1.0, "I"));
    shifted.A.terms.push_back(pauli_term(1, 0.25, "Z"));
    shifted.b_prep = Circuit(1, {Gate::x(0)});
    const Statevector x0_s = dense_solve_oracle(shifted);
    CHECK(expectation_pauli(x0_s, "Z") == doctest::Approx(-1.0).epsilon(1e-12));

    Rng rng(62);
    const Statevector x = random_state(2, rng);
    for (const std::string word : {"ZI", "XY", "IZ"}) {
        const ObservableDeviation d = observable_deviation(x, x, word);
        CHECK(d.value <= 1e-12);
        CHECK(d.squared <= 1e-12);
    }
}

TEST_CASE("observable deviations are bounded by twice the trace distance") {
    Rng rng(63);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(3));
        const Statevector x = random_state(n, rng);
        const Statevector y = random_state(n, rng);
        const double eps = trace_distance_pure(x, y);
        const std::string word = test::random_pauli_word(n, rng);
        const ObservableDeviation d = observable_deviation(x, y, word);
        CHECK(d.value <= 2.0 * eps + 1e-10);
    }
}

TEST_CASE("spectral check on the identity instance") {
    QlspInstance eye;
    eye.A.n = 2;
    eye.A.terms.push_back(pauli_term(2, 1.0, "II"));
    eye.b_prep = Circuit(2, {Gate::h(0), Gate::h(1)});
    const SpectralReport r = spectral_check(eye);
    CHECK(std::abs(r.e0) <= 1e-9);
    CHECK(r.e1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.gap_ok);
}

TEST_CASE("spectral gaps clear 1/kappa^2 for the benchmark families") {
    const QlspInstance ising = ising_qlsp(3, 0.1, 20.0);
    const SpectralReport ri = spectral_check(ising);
    CHECK(std::abs(ri.e0) <= 1e-9);
    CHECK(ri.e1 >= 1.0 / 400.0 - 1e-9);
    CHECK(ri.gap_ok);

    const QlspInstance deg = degenerate_qlsp(3, 10.0);
    const SpectralReport rd = spectral_check(deg);
    CHECK(std::abs(rd.e0) <= 1e-9);
    CHECK(rd.e1 >= 0.01 - 1e-9);
    CHECK(rd.gap_ok);

    Rng rng(64);
    for (int trial = 0; trial < 5; ++trial) {
        const QlspInstance r = random_qlsp(3, 4.0 + trial, 0.5, rng.next_u64());
        CHECK(spectral_check(r).gap_ok);
    }
}

TEST_CASE("certificates carry the bound and reproduce observables") {
    const QlspInstance inst = ising_qlsp(2, 0.1, 5.0);
    const Statevector x0 = dense_solve_oracle(inst);
    const Circuit solution = state_preparation_circuit(x0.amplitudes());
    const CostReport report = evaluate_cost(inst, solution, CostKind::Local);
    const Certificate cert = make_certificate(inst, report, solution, {"ZI", "IZ"});
    CHECK(cert.kappa == doctest::Approx(5.0));
    CHECK(cert.epsilon_upper ==
          doctest::Approx(epsilon_bound(report, 5.0, 2)).epsilon(1e-12));
    REQUIRE(cert.observables.size() == 2);
    for (const ObservableRecord& o : cert.observables) {
        CHECK(o.deviation_bound == doctest::Approx(2.0 * cert.epsilon_upper));
        const Statevector x = run_circuit(cert.solution_circuit, zero_state(2));
        CHECK(o.expectation == doctest::Approx(expectation_pauli(x, o.pauli)));
    }
}

TEST_CASE("certificate kappa falls back to the dense estimate") {
    QlspInstance inst = random_qlsp(2, 6.0, 0.6, 71);
    inst.kappa.reset();  // as if loaded from a file without metadata
    const Circuit v(2, {Gate::ry(0, 0.3), Gate::ry(1, -0.2)});
    const CostReport report = evaluate_cost(inst, v, CostKind::Global);
    const Certificate cert = make_certificate(inst, report, v);
    CHECK(cert.kappa == doctest::Approx(6.0).epsilon(1e-6));
}

#include "helpers.hpp"

#include <catch2/catch.hpp>

using namespace qatpg;
using test_helpers::fixed_rng;
using test_helpers::hadamard_all;
using test_helpers::is_point_mass;
using test_helpers::prob_of;

namespace {

Circuit toffoli() { return parse_circuit("qubits 3\ncn c=0,1 t=2\n"); }

// brute-force reference: |<k| H^n U H^n |prep>|^2 built from dense matrices
OutcomeDistribution dense_reference(const Circuit& c, const Test& t) {
    const int n = c.width;
    CMatrix u = unitary_of(c);
    if (t.basis == MeasBasis::X) u = u * hadamard_all(n);
    if (t.measure == MeasBasis::X) u = hadamard_all(n) * u;
    CVector out = u * basis_ket(1 << n, bits_to_index(t.prep));
    OutcomeDistribution d;
    for (unsigned k = 0; k < (1u << n); ++k) {
        const double p = std::norm(out(k));
        if (p > 1e-12) d[index_to_bits(n, k)] += p;
    }
    return d;
}

} // namespace

TEST_CASE("exact runs against the dense oracle", "[simulator]") {
    auto rng = fixed_rng(21);
    std::vector<Circuit> circuits = {
        parse_circuit("qubits 2\ncn c=0 t=1\n"),
        toffoli(),
        decompose_kcn(2),
        parse_circuit("qubits 3\ng h t=0\ncn c=0 t=2\ng v t=1\ncn c=1,2 t=0\n"),
    };
    for (const Circuit& c : circuits) {
        for (int rep = 0; rep < 8; ++rep) {
            Test t;
            t.prep = index_to_bits(c.width, static_cast<unsigned>(rng() % (1u << c.width)));
            t.basis = (rng() & 1) ? MeasBasis::X : MeasBasis::Z;
            t.measure = (rng() & 1) ? MeasBasis::X : MeasBasis::Z;
            REQUIRE(tvd(run_exact(c, t), dense_reference(c, t)) < 1e-9);
        }
    }
}

TEST_CASE("conjugate-basis separation of phase faults", "[simulator]") {
    Circuit gc = toffoli();
    const Test x001{"001", MeasBasis::X, MeasBasis::X};

    SECTION("gold circuit spreads over four strings") {
        OutcomeDistribution d = run_exact(gc, x001);
        REQUIRE(d.size() == 4);
        for (const char* bits : {"001", "011", "101", "111"})
            REQUIRE(prob_of(d, bits) == Approx(0.25).margin(1e-9));
    }
    SECTION("lost whole gate collapses to the preparation") {
        REQUIRE(is_point_mass(run_exact(apply_fault(gc, LostPhaseGate{0}), x001), "001"));
    }
    SECTION("lost middle control lands on 101") {
        REQUIRE(is_point_mass(run_exact(apply_fault(gc, LostPhaseControl{0, 1}), x001), "101"));
    }
    SECTION("lost top control lands on 011") {
        REQUIRE(is_point_mass(run_exact(apply_fault(gc, LostPhaseControl{0, 0}), x001), "011"));
    }
}

TEST_CASE("density evolution", "[simulator]") {
    auto rng = fixed_rng(22);

    SECTION("identity model is the identity") {
        Circuit c = parse_circuit("qubits 2\n");
        CMatrix rho = test_helpers::random_density(2, rng);
        REQUIRE(approx_equal(evolve_density(gold_model(c), rho), rho, 1e-12));
    }
    SECTION("trace and hermiticity preserved through channels") {
        Circuit gc = parse_circuit("qubits 2\ncn c=0 t=1\n");
        for (const Fault& f : {Fault(InitStuckPrep{0, 0, 0.6}), Fault(ForcedGate{0, 1}),
                               Fault(PauliFault{PauliKind::X, location_by_id(gc, 1), 0.3})}) {
            FaultedModel m = apply_fault(gc, f);
            for (int rep = 0; rep < 20; ++rep) {
                CMatrix rho = test_helpers::random_density(2, rng);
                CMatrix out = evolve_density(m, rho);
                REQUIRE(std::abs(out.trace().real() - 1.0) < 1e-9);
                REQUIRE(is_hermitian(out, 1e-9));
            }
        }
    }
    SECTION("rejects non-density input") {
        Circuit c = parse_circuit("qubits 1\n");
        CMatrix bad(2, 2);
        bad << 1, 1, 1, 1;
        REQUIRE_THROWS_AS(evolve_density(gold_model(c), bad), std::invalid_argument);
    }
}

TEST_CASE("width limits", "[simulator]") {
    SECTION("state vector path caps at 10") {
        Circuit wide;
        wide.width = 11;
        FaultedModel m = gold_model(wide);
        REQUIRE_THROWS_AS(run_exact(m, Test{std::string(11, '0'), MeasBasis::Z, MeasBasis::Z}),
                          std::invalid_argument);
    }
    SECTION("density path caps at 6") {
        Circuit wide;
        wide.width = 7;
        FaultedModel m = gold_model(wide);
        m.has_channel = true;
        REQUIRE_THROWS_AS(run_exact(m, Test{std::string(7, '0'), MeasBasis::Z, MeasBasis::Z}),
                          std::invalid_argument);
    }
}

TEST_CASE("sampling", "[simulator]") {
    Circuit gc = toffoli();

    SECTION("single shot lands in the support") {
        auto counts = run_shots(gc, {"001", MeasBasis::X, MeasBasis::X}, 1, 7);
        REQUIRE(counts.size() == 1);
        const std::string bits = counts.begin()->first;
        REQUIRE(prob_of(run_exact(gc, {"001", MeasBasis::X, MeasBasis::X}), bits) > 0.0);
    }
    SECTION("deterministic distribution gives a constant sample") {
        auto counts = run_shots(gc, {"110", MeasBasis::Z, MeasBasis::Z}, 100, 1234);
        REQUIRE(counts.size() == 1);
        REQUIRE(counts.at("111") == 100);
    }
    SECTION("uniform four-string support concentrates") {
        auto counts = run_shots(gc, {"001", MeasBasis::X, MeasBasis::X}, 4096, 99);
        REQUIRE(counts.size() == 4);
        // 5 sigma around 1024 at p = 1/4
        const double sigma = std::sqrt(4096 * 0.25 * 0.75);
        for (const char* bits : {"001", "011", "101", "111"})
            REQUIRE(std::abs(static_cast<double>(counts.at(bits)) - 1024.0) < 5 * sigma);
    }
    SECTION("same seed, same counts; different seed, different stream") {
        const Test t{"001", MeasBasis::X, MeasBasis::X};
        auto a = run_shots(gc, t, 500, 42);
        auto b = run_shots(gc, t, 500, 42);
        REQUIRE(a == b);
        auto c = run_shots(gc, t, 500, 43);
        REQUIRE(a != c);
    }
    SECTION("rejects zero shots") {
        REQUIRE_THROWS_AS(run_shots(gc, {"000", MeasBasis::Z, MeasBasis::Z}, 0, 1),
                          std::invalid_argument);
    }
    SECTION("frequencies converge on spread distributions") {
        const std::vector<std::pair<Circuit, Test>> cases = {
            {toffoli(), {"001", MeasBasis::X, MeasBasis::X}},
            {parse_circuit("qubits 3\ncn c=0 t=1\ncn c=0,1 t=2\n"), {"010", MeasBasis::X, MeasBasis::X}},
            {decompose_kcn(2), {"101", MeasBasis::X, MeasBasis::X}},
        };
        for (const auto& [c, t] : cases) {
            auto counts = run_shots(c, t, 10000, 5150);
            OutcomeDistribution freq;
            for (const auto& [bits, n] : counts) freq[bits] = static_cast<double>(n) / 10000.0;
            REQUIRE(tvd(freq, run_exact(c, t)) <= 0.05);
        }
    }
}

TEST_CASE("majority vote", "[simulator]") {
    REQUIRE(majority_vote({{"000", 70}, {"001", 30}}) == "000");
    REQUIRE(majority_vote({{"01", 50}, {"10", 50}}) == "01");
    REQUIRE(majority_vote({{"111", 1}}) == "111");
    REQUIRE_THROWS_AS(majority_vote({}), std::invalid_argument);
}

TEST_CASE("phase signatures", "[simulator]") {
    Circuit gc = toffoli();
    Circuit empty3 = parse_circuit("qubits 3\n");

    SECTION("preparation signature alternates with the last bit") {
        auto sig = phase_signature(gold_model(empty3), "001");
        for (unsigned k = 0; k < 8; ++k)
            REQUIRE(sig.at(index_to_bits(3, k)) == ((k & 1) ? -1 : 1));
    }
    SECTION("gold circuit flips 110 and 111 against the preparation") {
        auto initial = phase_signature(gold_model(empty3), "001");
        auto sig = phase_signature(gold_model(gc), "001");
        for (unsigned k = 0; k < 8; ++k) {
            const std::string bits = index_to_bits(3, k);
            if (bits == "110" || bits == "111")
                REQUIRE(sig.at(bits) == -initial.at(bits));
            else
                REQUIRE(sig.at(bits) == initial.at(bits));
        }
    }
    SECTION("weak whole gate leaves the preparation signature") {
        auto initial = phase_signature(gold_model(empty3), "001");
        auto sig = phase_signature(apply_fault(gc, LostPhaseGate{0}), "001");
        REQUIRE(sig == initial);
    }
    SECTION("non half-turn phases are flagged as inapplicable") {
        Circuit kicked = parse_circuit("qubits 2\ng cz(0.7) c=0 t=1\n");
        REQUIRE_THROWS_AS(phase_signature(gold_model(kicked), "11"), std::domain_error);
    }
    SECTION("channel models are rejected") {
        FaultedModel m = apply_fault(gc, InitStuckPrep{0, 0, 0.5});
        REQUIRE_THROWS_AS(phase_signature(m, "001"), std::invalid_argument);
    }
}

TEST_CASE("test textual form round trips", "[simulator]") {
    for (const Test& t : {Test{"010", MeasBasis::Z, MeasBasis::Z},
                          Test{"1", MeasBasis::X, MeasBasis::X},
                          Test{"0011", MeasBasis::Z, MeasBasis::X}}) {
        REQUIRE(test_from_string(test_to_string(t)) == t);
    }
    REQUIRE_THROWS_AS(test_from_string("010"), std::invalid_argument);
}

TEST_CASE("total variation distance", "[simulator]") {
    OutcomeDistribution a{{"00", 0.5}, {"11", 0.5}};
    OutcomeDistribution b{{"00", 1.0}};
    REQUIRE(tvd(a, a) == Approx(0.0));
    REQUIRE(tvd(a, b) == Approx(0.5));
    OutcomeDistribution c{{"01", 1.0}};
    REQUIRE(tvd(b, c) == Approx(1.0));
}

TEST_CASE("trace distance contracts under faulted channels", "[simulator]") {
    auto rng = fixed_rng(23);
    Circuit gc = parse_circuit("qubits 2\ncn c=0 t=1\ng h t=0\n");
    std::vector<Fault> faults = {InitStuckPrep{0, 0, 0.5}, InitStuckPrep{1, 1, 0.25},
                                 ForcedGate{0, 0}, ForcedGate{0, 1},
                                 PauliFault{PauliKind::Z, location_by_id(gc, 2), 0.7}};
    for (const Fault& f : faults) {
        FaultedModel m = apply_fault(gc, f);
        for (int rep = 0; rep < 20; ++rep) {
            CMatrix rho = test_helpers::random_density(2, rng);
            CMatrix sigma = test_helpers::random_density(2, rng);
            const double before = trace_distance(rho, sigma);
            const double after = trace_distance(evolve_density(m, rho), evolve_density(m, sigma));
            REQUIRE(after <= before + 1e-9);
        }
    }
}

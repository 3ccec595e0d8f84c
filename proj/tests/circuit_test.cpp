#include "helpers.hpp"

#include <catch2/catch.hpp>

using namespace qatpg;
using test_helpers::kcn_permutation_oracle;

namespace {

const char* kChain3 =
    "qubits 3\n"
    "cn c=0 t=1\n"
    "cn c=0,1 t=2\n";

Circuit toffoli_cv() { return decompose_kcn(2); }

} // namespace

TEST_CASE("parse simple circuits", "[circuit]") {
    SECTION("single cn") {
        Circuit c = parse_circuit("qubits 2\ncn c=0 t=1\n");
        REQUIRE(c.width == 2);
        REQUIRE(c.stages.size() == 1);
        REQUIRE(c.stages[0].kind == GateKind::KCN);
        REQUIRE(c.stages[0].controls == std::vector<int>{0});
        REQUIRE(c.stages[0].target == 1);
    }
    SECTION("toffoli") {
        Circuit c = parse_circuit("qubits 3\ncn c=0,1 t=2\n");
        REQUIRE(c.stages[0].controls == std::vector<int>({0, 1}));
    }
    SECTION("two-stage chain with comments") {
        Circuit c = parse_circuit("# comment line\nqubits 3\ncn c=0 t=1  # trailing\ncn c=0,1 t=2\n");
        REQUIRE(c.stages.size() == 2);
    }
    SECTION("single-qubit gates and parameters") {
        Circuit c = parse_circuit("qubits 2\ng h t=1\ng cz(1.5) c=0 t=1\ng rnot(2) c=0 t=1\n");
        REQUIRE(c.stages[1].name == "cz");
        REQUIRE(c.stages[1].param == Approx(1.5));
        REQUIRE(c.stages[2].param == Approx(2));
    }
}

TEST_CASE("parse errors carry line numbers", "[circuit]") {
    auto expect_line = [](const char* text, int line) {
        try {
            parse_circuit(text);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(e.line == line);
        }
    };
    expect_line("qubits 2\ncn c=0 t=5\n", 2);          // wire out of range
    expect_line("qubits 3\ncn c=0,0 t=2\n", 2);        // duplicate control
    expect_line("qubits 2\nbogus c=0 t=1\n", 2);       // unknown directive
    expect_line("qubits 2\ng warp t=0\n", 2);          // unknown gate
    expect_line("qubits 2\ncn c=1 t=1\n", 2);          // control equals target
    expect_line("cn c=0 t=1\n", 1);                    // missing qubits line
    expect_line("qubits 2\ng cz c=0 t=1\n", 2);        // cz without angle
}

TEST_CASE("serialize round trip", "[circuit]") {
    for (const std::string& text :
         {std::string("qubits 2\ncn c=0 t=1\n"), std::string(kChain3),
          std::string("qubits 3\nname demo\ng cz(0.25) c=0,1 t=2\ng vdag c=0 t=1\n")}) {
        Circuit c = parse_circuit(text);
        Circuit again = parse_circuit(serialize_circuit(c));
        REQUIRE(again == c);
        REQUIRE(serialize_circuit(again) == serialize_circuit(c));
    }
    SECTION("decompositions survive the format") {
        for (int k = 1; k <= 4; ++k) {
            Circuit c = decompose_kcn(k);
            REQUIRE(parse_circuit(serialize_circuit(c)) == c);
        }
    }
}

TEST_CASE("error location enumeration", "[circuit]") {
    SECTION("five-gate toffoli decomposition has the known 14") {
        auto locs = enumerate_error_locations(toffoli_cv());
        REQUIRE(locs.size() == 14);
        int per_wire[3] = {0, 0, 0};
        for (const auto& l : locs) per_wire[l.wire]++;
        REQUIRE(per_wire[0] == 4);
        REQUIRE(per_wire[1] == 6);
        REQUIRE(per_wire[2] == 4);
        // ids run 1..14 wire-major
        for (size_t i = 0; i < locs.size(); ++i) REQUIRE(locs[i].id == static_cast<int>(i) + 1);
        // top wire: before each of its three gates, then after the last
        REQUIRE(locs[0].pos == LocPos::BeforeGate);
        REQUIRE(locs[0].stage == 1);
        REQUIRE(locs[3].pos == LocPos::AfterLastGate);
        REQUIRE(locs[3].stage == 4);
        // middle wire ends with a distinct circuit-output segment
        REQUIRE(locs[9].wire == 1);
        REQUIRE(locs[9].pos == LocPos::CircuitOutput);
    }
    SECTION("single cn has two per wire") {
        auto locs = enumerate_error_locations(parse_circuit("qubits 2\ncn c=0 t=1\n"));
        REQUIRE(locs.size() == 4);
    }
    SECTION("empty circuit has output locations only") {
        auto locs = enumerate_error_locations(parse_circuit("qubits 3\n"));
        REQUIRE(locs.size() == 3);
        for (const auto& l : locs) REQUIRE(l.pos == LocPos::CircuitOutput);
    }
}

TEST_CASE("kcn decomposition", "[circuit]") {
    SECTION("k=1 is a plain cn") {
        Circuit c = decompose_kcn(1);
        REQUIRE(c.stages.size() == 1);
        REQUIRE(c.stages[0].kind == GateKind::KCN);
    }
    SECTION("k=2 is the five-gate cv pattern") {
        Circuit c = decompose_kcn(2);
        REQUIRE(c.stages.size() == 5);
        REQUIRE(c.stages[0].name == "v");
        REQUIRE(c.stages[1].kind == GateKind::KCN);
        REQUIRE(c.stages[2].name == "vdag");
        REQUIRE(c.stages[4].name == "v");
        REQUIRE(approx_equal(unitary_of(c), kcn_permutation_oracle(2), 1e-9));
    }
    SECTION("k=3 matches the 3-cn permutation on every basis state") {
        Circuit c = decompose_kcn(3);
        CMatrix u = unitary_of(c);
        CMatrix want = kcn_permutation_oracle(3);
        for (unsigned j = 0; j < 16; ++j) {
            CVector out = u * basis_ket(16, j);
            CVector expect = want * basis_ket(16, j);
            REQUIRE((out - expect).norm() < 1e-9);
        }
    }
    SECTION("k=4 matches up to global phase") {
        REQUIRE(approx_equal(unitary_of(decompose_kcn(4)), kcn_permutation_oracle(4), 1e-9, true));
    }
    SECTION("unsupported orders throw") {
        REQUIRE_THROWS_AS(decompose_kcn(0), std::invalid_argument);
        REQUIRE_THROWS_AS(decompose_kcn(5), std::invalid_argument);
    }
}

TEST_CASE("unitary of a circuit", "[circuit]") {
    SECTION("empty circuit") {
        REQUIRE(approx_equal(unitary_of(parse_circuit("qubits 2\n")), CMatrix::Identity(4, 4)));
    }
    SECTION("cn maps |10> to |11>") {
        CMatrix u = unitary_of(parse_circuit("qubits 2\ncn c=0 t=1\n"));
        REQUIRE(std::abs(u(3, 2) - 1.0) < 1e-12);
        REQUIRE(std::abs(u(2, 3) - 1.0) < 1e-12);
    }
    SECTION("chain circuit maps |100> to |111>") {
        CMatrix u = unitary_of(parse_circuit(kChain3));
        CVector out = u * basis_ket(8, 4);
        REQUIRE(std::abs(out(7) - 1.0) < 1e-12);
    }
    SECTION("always unitary") {
        for (const Circuit& c : {parse_circuit(kChain3), decompose_kcn(2), decompose_kcn(3)})
            REQUIRE(is_unitary(unitary_of(c), 1e-10));
    }
    SECTION("width limit") {
        Circuit wide;
        wide.width = 13;
        REQUIRE_THROWS_AS(unitary_of(wide), std::invalid_argument);
    }
}

TEST_CASE("classical propagation", "[circuit]") {
    Circuit chain = parse_circuit(kChain3);
    SECTION("matches the unitary on basis states") {
        CMatrix u = unitary_of(chain);
        for (unsigned j = 0; j < 8; ++j) {
            auto out = classical_run(chain, j);
            REQUIRE(out.has_value());
            REQUIRE(std::abs(u(*out, j) - 1.0) < 1e-12);
        }
    }
    SECTION("stops on superposing gates") {
        REQUIRE_FALSE(classical_run(parse_circuit("qubits 1\ng h t=0\n"), 0).has_value());
    }
    SECTION("records stage views") {
        const auto views = drive_views(chain, bits_to_index("110"));
        REQUIRE(views.size() == 2);
        REQUIRE(views[0].control_values == std::vector<int>{1});
        REQUIRE(views[0].target_value == 1);
        // after the first cn the middle wire reads 0
        REQUIRE(views[1].control_values == std::vector<int>({1, 0}));
    }
    SECTION("unknown values spread only through touched wires") {
        // v superposes the bottom wire once its control fires; the control
        // wires stay classical throughout
        const auto views = drive_views(decompose_kcn(2), bits_to_index("110"));
        REQUIRE(views.size() == 5);
        REQUIRE(views[0].control_values == std::vector<int>{1});   // g1 fires
        REQUIRE(views[0].target_value == 0);
        REQUIRE(views[2].target_value == -1);                      // bottom now unknown
        REQUIRE(views[3].control_values == std::vector<int>{1});   // top still classical
        const auto idle = drive_views(decompose_kcn(2), bits_to_index("000"));
        REQUIRE(idle[4].target_value == 0);                        // nothing ever fired
    }
}

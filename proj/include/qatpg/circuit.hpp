#pragma once

// Circuit intermediate representation, the text format parser, wire error
// location enumeration and the k-CN decompositions into CN plus controlled
// root-of-NOT gates.  One gate per stage; stage order is evaluation order.

#include "qatpg/qmath.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qatpg {

// ---------------------------------------------------------------------------
// gates and circuits

enum class GateKind { KCN, Single };

struct Gate {
    GateKind kind = GateKind::KCN;
    std::string name = "cn";     // single gates: h, x, v, vdag, cz, rnot, rnotdag
    double param = 0.0;          // cz angle, or root order for rnot/rnotdag
    bool has_param = false;
    std::vector<int> controls;   // positive polarity, empty allowed for singles
    int target = 0;

    bool operator==(const Gate&) const = default;
};

struct Circuit {
    int width = 0;
    std::vector<Gate> stages;
    std::string name;

    bool operator==(const Circuit&) const = default;
};

inline void validate_gate(const Gate& g, int width) {
    if (g.target < 0 || g.target >= width)
        throw std::invalid_argument("gate target out of range");
    for (size_t i = 0; i < g.controls.size(); ++i) {
        int c = g.controls[i];
        if (c < 0 || c >= width)
            throw std::invalid_argument("gate control out of range");
        if (c == g.target)
            throw std::invalid_argument("gate control coincides with target");
        for (size_t j = i + 1; j < g.controls.size(); ++j)
            if (g.controls[j] == c)
                throw std::invalid_argument("duplicate gate control");
    }
    if (g.kind == GateKind::KCN && g.controls.empty())
        throw std::invalid_argument("cn gate needs at least one control");
}

inline bool gate_touches(const Gate& g, int wire) {
    if (g.target == wire) return true;
    return std::find(g.controls.begin(), g.controls.end(), wire) != g.controls.end();
}

/// The 2x2 operator a gate applies to its target when active.
inline CMatrix gate_target_op(const Gate& g) {
    if (g.kind == GateKind::KCN) return pauli(PauliKind::X);
    if (g.name == "h") return hadamard();
    if (g.name == "x") return pauli(PauliKind::X);
    if (g.name == "v") return v_gate();
    if (g.name == "vdag") return v_dagger();
    if (g.name == "cz") {
        CMatrix m = CMatrix::Identity(2, 2);
        m(1, 1) = std::exp(Complex(0.0, g.param));
        return m;
    }
    if (g.name == "rnot") return root_of_not(static_cast<int>(g.param));
    if (g.name == "rnotdag") return root_of_not(static_cast<int>(g.param)).adjoint().eval();
    throw std::invalid_argument("unknown gate name \"" + g.name + "\"");
}

// ---------------------------------------------------------------------------
// number formatting: shortest decimal form that parses back exactly

inline std::string format_double(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    return std::to_string(v);
}

// ---------------------------------------------------------------------------
// text format

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

namespace detail {

inline std::vector<int> parse_wire_list(const std::string& s, int line) {
    std::vector<int> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (cur.empty()) throw ParseError(line, "empty wire index");
            try {
                out.push_back(std::stoi(cur));
            } catch (const std::exception&) {
                throw ParseError(line, "bad wire index \"" + cur + "\"");
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

} // namespace detail

inline Circuit parse_circuit(const std::string& text) {
    Circuit c;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool have_width = false;

    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string word;
        if (!(ls >> word)) continue;

        if (!have_width) {
            if (word != "qubits") throw ParseError(lineno, "expected \"qubits <n>\"");
            if (!(ls >> c.width) || c.width < 1 || c.width > 24)
                throw ParseError(lineno, "bad qubit count");
            have_width = true;
            continue;
        }

        if (word == "qubits") throw ParseError(lineno, "duplicate qubits line");

        if (word == "name") {
            std::string rest;
            std::getline(ls, rest);
            auto first = rest.find_first_not_of(" \t");
            auto last = rest.find_last_not_of(" \t\r");
            c.name = first == std::string::npos ? "" : rest.substr(first, last - first + 1);
            continue;
        }

        Gate g;
        if (word == "cn") {
            g.kind = GateKind::KCN;
            g.name = "cn";
        } else if (word == "g") {
            g.kind = GateKind::Single;
            std::string spec;
            if (!(ls >> spec)) throw ParseError(lineno, "missing gate name");
            if (auto paren = spec.find('('); paren != std::string::npos) {
                if (spec.back() != ')') throw ParseError(lineno, "missing ')'");
                try {
                    g.param = std::stod(spec.substr(paren + 1, spec.size() - paren - 2));
                } catch (const std::exception&) {
                    throw ParseError(lineno, "bad gate parameter");
                }
                g.has_param = true;
                g.name = spec.substr(0, paren);
            } else {
                g.name = spec;
            }
            static const std::vector<std::string> known = {"h", "x", "v", "vdag", "cz", "rnot", "rnotdag"};
            if (std::find(known.begin(), known.end(), g.name) == known.end())
                throw ParseError(lineno, "unknown gate \"" + g.name + "\"");
            const bool needs_param = g.name == "cz" || g.name == "rnot" || g.name == "rnotdag";
            if (needs_param != g.has_param)
                throw ParseError(lineno, needs_param ? "gate \"" + g.name + "\" needs a parameter"
                                                     : "gate \"" + g.name + "\" takes no parameter");
        } else {
            throw ParseError(lineno, "unknown directive \"" + word + "\"");
        }

        bool have_target = false;
        std::string tok;
        while (ls >> tok) {
            if (tok.rfind("c=", 0) == 0) {
                g.controls = detail::parse_wire_list(tok.substr(2), lineno);
            } else if (tok.rfind("t=", 0) == 0) {
                try {
                    g.target = std::stoi(tok.substr(2));
                } catch (const std::exception&) {
                    throw ParseError(lineno, "bad target index");
                }
                have_target = true;
            } else {
                throw ParseError(lineno, "unexpected token \"" + tok + "\"");
            }
        }
        if (!have_target) throw ParseError(lineno, "missing t=<wire>");
        try {
            validate_gate(g, c.width);
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
        c.stages.push_back(std::move(g));
    }
    if (!have_width) throw ParseError(lineno, "missing \"qubits <n>\" line");
    return c;
}

inline std::string serialize_gate(const Gate& g) {
    std::string out;
    if (g.kind == GateKind::KCN) {
        out = "cn";
    } else {
        out = "g " + g.name;
        if (g.has_param) out += "(" + format_double(g.param) + ")";
    }
    if (!g.controls.empty()) {
        out += " c=";
        for (size_t i = 0; i < g.controls.size(); ++i)
            out += (i ? "," : "") + std::to_string(g.controls[i]);
    }
    out += " t=" + std::to_string(g.target);
    return out;
}

inline std::string serialize_circuit(const Circuit& c) {
    std::string out = "qubits " + std::to_string(c.width) + "\n";
    if (!c.name.empty()) out += "name " + c.name + "\n";
    for (const Gate& g : c.stages) out += serialize_gate(g) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// error locations

enum class LocPos { BeforeGate, AfterLastGate, CircuitOutput };

struct ErrorLocation {
    int wire = 0;
    LocPos pos = LocPos::CircuitOutput;
    int stage = -1;   // BeforeGate: that stage; AfterLastGate: last touching stage
    int id = 0;       // 1-based, wire-major, top wire first

    bool operator==(const ErrorLocation&) const = default;
};

/// Index into the stage list where an insertion at this location lands.
inline int insertion_point(const ErrorLocation& loc, const Circuit& c) {
    switch (loc.pos) {
        case LocPos::BeforeGate: return loc.stage;
        case LocPos::AfterLastGate: return loc.stage + 1;
        case LocPos::CircuitOutput: return static_cast<int>(c.stages.size());
    }
    return 0;
}

/// Per wire: one location before each stage touching the wire, one after the
/// last touching stage, and one at circuit output when that is a distinct
/// wire segment.  Untouched wires get the output location only.
inline std::vector<ErrorLocation> enumerate_error_locations(const Circuit& c) {
    std::vector<ErrorLocation> out;
    int next_id = 1;
    const int last_stage = static_cast<int>(c.stages.size()) - 1;
    for (int w = 0; w < c.width; ++w) {
        std::vector<int> touches;
        for (int s = 0; s <= last_stage; ++s)
            if (gate_touches(c.stages[static_cast<size_t>(s)], w)) touches.push_back(s);
        if (touches.empty()) {
            out.push_back({w, LocPos::CircuitOutput, -1, next_id++});
            continue;
        }
        for (int s : touches)
            out.push_back({w, LocPos::BeforeGate, s, next_id++});
        out.push_back({w, LocPos::AfterLastGate, touches.back(), next_id++});
        if (touches.back() != last_stage)
            out.push_back({w, LocPos::CircuitOutput, -1, next_id++});
    }
    return out;
}

inline ErrorLocation location_by_id(const Circuit& c, int id) {
    for (const ErrorLocation& l : enumerate_error_locations(c))
        if (l.id == id) return l;
    throw std::invalid_argument("no error location with id " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// k-CN decomposition

namespace detail {

inline Gate controlled_root(int control, int target, int level, bool dag) {
    Gate g;
    g.kind = GateKind::Single;
    g.controls = {control};
    g.target = target;
    if (level == 1) {
        g.name = dag ? "vdag" : "v";
    } else {
        g.name = dag ? "rnotdag" : "rnot";
        g.param = level;
        g.has_param = true;
    }
    return g;
}

inline void emit_kcn(std::vector<Gate>& out, std::vector<int> ctrls, int target);

// multi-controlled 2^level-th root of NOT, same recursion shape as emit_kcn
inline void emit_croot(std::vector<Gate>& out, std::vector<int> ctrls, int target, int level) {
    if (ctrls.size() == 1) {
        out.push_back(controlled_root(ctrls[0], target, level, false));
        return;
    }
    const int pivot = ctrls.back();
    std::vector<int> rest(ctrls.begin(), ctrls.end() - 1);
    out.push_back(controlled_root(pivot, target, level + 1, false));
    emit_kcn(out, rest, pivot);
    out.push_back(controlled_root(pivot, target, level + 1, true));
    emit_kcn(out, rest, pivot);
    emit_croot(out, rest, target, level + 1);
}

inline void emit_kcn(std::vector<Gate>& out, std::vector<int> ctrls, int target) {
    if (ctrls.size() == 1) {
        Gate g;
        g.kind = GateKind::KCN;
        g.controls = ctrls;
        g.target = target;
        out.push_back(g);
        return;
    }
    const int pivot = ctrls.back();
    std::vector<int> rest(ctrls.begin(), ctrls.end() - 1);
    out.push_back(controlled_root(pivot, target, 1, false));
    emit_kcn(out, rest, pivot);
    out.push_back(controlled_root(pivot, target, 1, true));
    emit_kcn(out, rest, pivot);
    emit_croot(out, rest, target, 1);
}

} // namespace detail

/// Circuit over k+1 wires whose unitary equals the k-CN gate, built from CN
/// and controlled root-of-NOT gates.  k=2 is the CV / CVdag pattern.
inline Circuit decompose_kcn(int k) {
    if (k < 1 || k > 4) throw std::invalid_argument("decompose_kcn: supported range is 1..4");
    Circuit c;
    c.width = k + 1;
    std::vector<int> ctrls(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) ctrls[static_cast<size_t>(i)] = i;
    detail::emit_kcn(c.stages, ctrls, k);
    return c;
}

// ---------------------------------------------------------------------------
// state application

/// Apply a gate in place to an n-qubit state vector.
inline void apply_gate(CVector& state, const Gate& g, int n) {
    unsigned cmask = 0;
    for (int c : g.controls) cmask |= wire_bit(n, c);
    const unsigned tbit = wire_bit(n, g.target);
    const CMatrix op = gate_target_op(g);
    const unsigned dim = 1u << n;
    for (unsigned k = 0; k < dim; ++k) {
        if ((k & cmask) != cmask || (k & tbit)) continue;
        const unsigned k1 = k | tbit;
        const Complex a0 = state(k), a1 = state(k1);
        state(k) = op(0, 0) * a0 + op(0, 1) * a1;
        state(k1) = op(1, 0) * a0 + op(1, 1) * a1;
    }
}

/// Apply a bare single-qubit operator on one wire (no controls).
inline void apply_wire_op(CVector& state, const CMatrix& op, int wire, int n) {
    const unsigned tbit = wire_bit(n, wire);
    const unsigned dim = 1u << n;
    for (unsigned k = 0; k < dim; ++k) {
        if (k & tbit) continue;
        const unsigned k1 = k | tbit;
        const Complex a0 = state(k), a1 = state(k1);
        state(k) = op(0, 0) * a0 + op(0, 1) * a1;
        state(k1) = op(1, 0) * a0 + op(1, 1) * a1;
    }
}

/// Full product of the stage unitaries, applied in stage order.
inline CMatrix unitary_of(const Circuit& c) {
    if (c.width > 12) throw std::invalid_argument("unitary_of: width exceeds 12 qubits");
    const Eigen::Index dim = Eigen::Index{1} << c.width;
    CMatrix u = CMatrix::Identity(dim, dim);
    CVector col(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        col = u.col(j);
        for (const Gate& g : c.stages) apply_gate(col, g, c.width);
        u.col(j) = col;
    }
    return u;
}

/// The k-CN permutation matrix itself, for oracle comparisons.
inline CMatrix kcn_unitary(int k) {
    const int n = k + 1;
    const unsigned dim = 1u << n;
    unsigned cmask = 0;
    for (int c = 0; c < k; ++c) cmask |= wire_bit(n, c);
    const unsigned tbit = wire_bit(n, k);
    CMatrix u = CMatrix::Zero(dim, dim);
    for (unsigned j = 0; j < dim; ++j)
        u((j & cmask) == cmask ? (j ^ tbit) : j, j) = 1.0;
    return u;
}

// ---------------------------------------------------------------------------
// classical propagation (basis-state circuits)

/// Propagate a computational basis input through the circuit.  Returns the
/// output index, or nullopt as soon as a gate would leave the basis (h, v,
/// vdag, rnot); cz only shifts phase, so basis indices pass through it.
inline std::optional<unsigned> classical_run(const Circuit& c, unsigned input) {
    unsigned idx = input;
    for (const Gate& g : c.stages) {
        bool active = true;
        for (int cw : g.controls)
            if (!(idx & wire_bit(c.width, cw))) { active = false; break; }
        if (!active) continue;
        if (g.kind == GateKind::KCN || g.name == "x") {
            idx ^= wire_bit(c.width, g.target);
        } else if (g.name == "cz") {
            // diagonal, basis index unchanged
        } else {
            return std::nullopt;
        }
    }
    return idx;
}

/// Control/target values seen by one stage while propagating a basis state;
/// -1 marks a wire whose value is no longer a definite basis bit.
struct StageView {
    std::vector<int> control_values;  // aligned with gate.controls
    int target_value = 0;
};

/// Three-valued drive propagation of a basis input.  Each wire holds 0, 1 or
/// unknown; superposing gates and gates fired under unknown activation leave
/// their target unknown, while wires they never touch stay classical.
inline std::vector<StageView> drive_views(const Circuit& c, unsigned input) {
    std::vector<int> val(static_cast<size_t>(c.width));
    for (int w = 0; w < c.width; ++w)
        val[static_cast<size_t>(w)] = (input & wire_bit(c.width, w)) ? 1 : 0;

    std::vector<StageView> views;
    views.reserve(c.stages.size());
    for (const Gate& g : c.stages) {
        StageView v;
        for (int cw : g.controls) v.control_values.push_back(val[static_cast<size_t>(cw)]);
        v.target_value = val[static_cast<size_t>(g.target)];
        views.push_back(std::move(v));

        int active = 1;   // 1 certain, 0 impossible, -1 unknown
        for (int cw : g.controls) {
            if (val[static_cast<size_t>(cw)] == 0) { active = 0; break; }
            if (val[static_cast<size_t>(cw)] == -1) active = -1;
        }
        if (active == 0 || g.name == "cz") continue;
        const bool flips = g.kind == GateKind::KCN || g.name == "x";
        int& tv = val[static_cast<size_t>(g.target)];
        if (flips && active == 1 && tv != -1)
            tv ^= 1;
        else
            tv = -1;
    }
    return views;
}

} // namespace qatpg

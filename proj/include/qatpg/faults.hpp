#pragma once

// Logical fault taxonomy and the transformation of a gold circuit into a
// faulted executable model.  Unitary faults become gate insertions or
// substitutions; non-unitary ones become trace-preserving Kraus channels.

#include "qatpg/circuit.hpp"

#include <variant>

namespace qatpg {

// ---------------------------------------------------------------------------
// fault variants

struct PauliFault {
    PauliKind kind = PauliKind::X;
    ErrorLocation loc;
    double p = 1.0;   // placement probability in (0, 1]
    bool operator==(const PauliFault&) const = default;
};

struct InitRotation {
    int qubit = 0;
    Axis axis = Axis::X;
    double theta = 0.0;
    bool operator==(const InitRotation&) const = default;
};

struct InitStuckPrep {
    int qubit = 0;
    int stuck_to = 0;      // 0 or 1
    double gamma = 1.0;    // damping strength in [0, 1]
    bool operator==(const InitStuckPrep&) const = default;
};

struct LostPhaseControl {
    int stage = 0;
    int wire = 0;
    bool operator==(const LostPhaseControl&) const = default;
};

struct LostPhaseGate {
    int stage = 0;
    bool operator==(const LostPhaseGate&) const = default;
};

struct PhaseKick {
    int stage = 0;
    double eps = 0.0;      // activating phase becomes exp(i*(pi + eps))
    bool operator==(const PhaseKick&) const = default;
};

struct FadedControl {
    int stage = 0;
    int wire = 0;
    bool operator==(const FadedControl&) const = default;
};

struct ForcedGate {
    int stage = 0;
    int value = 0;         // target forced to |0> or |1> on activation
    bool operator==(const ForcedGate&) const = default;
};

struct MeasStuck {
    int qubit = 0;
    int value = 0;
    bool operator==(const MeasStuck&) const = default;
};

struct CzAngle {
    int stage = 0;
    double phi = 0.0;      // replacement activating phase angle
    bool operator==(const CzAngle&) const = default;
};

using Fault = std::variant<PauliFault, InitRotation, InitStuckPrep, LostPhaseControl,
                           LostPhaseGate, PhaseKick, FadedControl, ForcedGate,
                           MeasStuck, CzAngle>;

enum class FaultClass {
    Pauli, InitRotationC, InitStuck, LostPhase, Kick, Faded, Forced, Meas, CzAngleC
};

struct FaultParams {
    double pauli_p = 1.0;
    double theta = kPi;       // init rotation angle
    double gamma = 1.0;       // init damping
    double eps = 0.1;         // phase kick
    double phi = kPi / 2.0;   // cz angle error
};

struct FaultSet {
    Circuit host;
    std::vector<Fault> faults;
    bool single_fault = true;   // each run injects exactly one element
};

// ---------------------------------------------------------------------------
// textual forms

inline std::string pauli_char(PauliKind k) {
    switch (k) {
        case PauliKind::X: return "x";
        case PauliKind::Y: return "y";
        case PauliKind::Z: return "z";
        case PauliKind::I: return "i";
    }
    return "?";
}

inline std::string fault_to_string(const Fault& f) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PauliFault>)
                return "pauli:" + pauli_char(v.kind) + "@L" + std::to_string(v.loc.id) +
                       " p=" + format_double(v.p);
            else if constexpr (std::is_same_v<T, InitRotation>)
                return "init:rot q=" + std::to_string(v.qubit) + " axis=" + axis_char(v.axis) +
                       " theta=" + format_double(v.theta);
            else if constexpr (std::is_same_v<T, InitStuckPrep>)
                return "init:stuck q=" + std::to_string(v.qubit) + " to=" + std::to_string(v.stuck_to) +
                       " gamma=" + format_double(v.gamma);
            else if constexpr (std::is_same_v<T, LostPhaseControl>)
                return "lostphase:ctrl s=" + std::to_string(v.stage) + " w=" + std::to_string(v.wire);
            else if constexpr (std::is_same_v<T, LostPhaseGate>)
                return "lostphase:gate s=" + std::to_string(v.stage);
            else if constexpr (std::is_same_v<T, PhaseKick>)
                return "kick s=" + std::to_string(v.stage) + " eps=" + format_double(v.eps);
            else if constexpr (std::is_same_v<T, FadedControl>)
                return "faded s=" + std::to_string(v.stage) + " w=" + std::to_string(v.wire);
            else if constexpr (std::is_same_v<T, ForcedGate>)
                return "forced s=" + std::to_string(v.stage) + " v=" + std::to_string(v.value);
            else if constexpr (std::is_same_v<T, MeasStuck>)
                return "meas q=" + std::to_string(v.qubit) + " v=" + std::to_string(v.value);
            else
                return "czangle s=" + std::to_string(v.stage) + " phi=" + format_double(v.phi);
        },
        f);
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double field_num(const std::vector<std::string>& toks, const std::string& key) {
    for (const auto& t : toks)
        if (t.rfind(key + "=", 0) == 0) return std::stod(t.substr(key.size() + 1));
    throw std::invalid_argument("fault spec: missing " + key + "=");
}

inline int field_int(const std::vector<std::string>& toks, const std::string& key) {
    return static_cast<int>(field_num(toks, key));
}

inline std::string field_str(const std::vector<std::string>& toks, const std::string& key) {
    for (const auto& t : toks)
        if (t.rfind(key + "=", 0) == 0) return t.substr(key.size() + 1);
    throw std::invalid_argument("fault spec: missing " + key + "=");
}

} // namespace detail

/// Parse the textual form back; the host circuit resolves location ids.
inline Fault fault_from_string(const std::string& s, const Circuit& host) {
    auto toks = detail::split_ws(s);
    if (toks.empty()) throw std::invalid_argument("empty fault spec");
    const std::string& head = toks[0];

    if (head.rfind("pauli:", 0) == 0) {
        auto at = head.find("@L");
        if (at == std::string::npos || at != 7)
            throw std::invalid_argument("fault spec: expected pauli:<k>@L<id>");
        PauliFault f;
        f.kind = pauli_kind_from_char(head[6]);
        f.loc = location_by_id(host, std::stoi(head.substr(at + 2)));
        f.p = detail::field_num(toks, "p");
        if (!(f.p > 0.0 && f.p <= 1.0)) throw std::invalid_argument("fault spec: p must be in (0,1]");
        return f;
    }
    if (head == "init:rot")
        return InitRotation{detail::field_int(toks, "q"),
                            axis_from_char(detail::field_str(toks, "axis")[0]),
                            detail::field_num(toks, "theta")};
    if (head == "init:stuck") {
        InitStuckPrep f{detail::field_int(toks, "q"), detail::field_int(toks, "to"),
                        detail::field_num(toks, "gamma")};
        if (f.gamma < 0.0 || f.gamma > 1.0)
            throw std::invalid_argument("fault spec: gamma must be in [0,1]");
        return f;
    }
    if (head == "lostphase:ctrl")
        return LostPhaseControl{detail::field_int(toks, "s"), detail::field_int(toks, "w")};
    if (head == "lostphase:gate")
        return LostPhaseGate{detail::field_int(toks, "s")};
    if (head == "kick")
        return PhaseKick{detail::field_int(toks, "s"), detail::field_num(toks, "eps")};
    if (head == "faded")
        return FadedControl{detail::field_int(toks, "s"), detail::field_int(toks, "w")};
    if (head == "forced")
        return ForcedGate{detail::field_int(toks, "s"), detail::field_int(toks, "v")};
    if (head == "meas")
        return MeasStuck{detail::field_int(toks, "q"), detail::field_int(toks, "v")};
    if (head == "czangle")
        return CzAngle{detail::field_int(toks, "s"), detail::field_num(toks, "phi")};
    throw std::invalid_argument("unknown fault spec \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// enumeration

inline std::vector<FaultClass> all_fault_classes() {
    return {FaultClass::Pauli, FaultClass::InitRotationC, FaultClass::InitStuck,
            FaultClass::LostPhase, FaultClass::Kick, FaultClass::Faded,
            FaultClass::Forced, FaultClass::Meas, FaultClass::CzAngleC};
}

inline FaultClass fault_class_from_name(const std::string& name) {
    if (name == "pauli") return FaultClass::Pauli;
    if (name == "initrot") return FaultClass::InitRotationC;
    if (name == "initstuck") return FaultClass::InitStuck;
    if (name == "lostphase") return FaultClass::LostPhase;
    if (name == "kick") return FaultClass::Kick;
    if (name == "faded") return FaultClass::Faded;
    if (name == "forced") return FaultClass::Forced;
    if (name == "meas") return FaultClass::Meas;
    if (name == "czangle") return FaultClass::CzAngleC;
    throw std::invalid_argument("unknown fault class \"" + name + "\"");
}

inline std::string fault_class_name(FaultClass c) {
    switch (c) {
        case FaultClass::Pauli: return "pauli";
        case FaultClass::InitRotationC: return "initrot";
        case FaultClass::InitStuck: return "initstuck";
        case FaultClass::LostPhase: return "lostphase";
        case FaultClass::Kick: return "kick";
        case FaultClass::Faded: return "faded";
        case FaultClass::Forced: return "forced";
        case FaultClass::Meas: return "meas";
        case FaultClass::CzAngleC: return "czangle";
    }
    return "?";
}

/// Deterministic enumeration of every fault of the requested classes, in
/// class order, location/stage/qubit-major within a class.
inline FaultSet enumerate_faults(const Circuit& c, const std::vector<FaultClass>& classes,
                                 const FaultParams& params = {}) {
    FaultSet fs;
    fs.host = c;
    auto wants = [&](FaultClass k) {
        return std::find(classes.begin(), classes.end(), k) != classes.end();
    };
    const int nstages = static_cast<int>(c.stages.size());

    if (wants(FaultClass::Pauli)) {
        const auto locs = enumerate_error_locations(c);
        for (PauliKind k : {PauliKind::X, PauliKind::Y, PauliKind::Z})
            for (const auto& l : locs)
                fs.faults.push_back(PauliFault{k, l, params.pauli_p});
    }
    if (wants(FaultClass::InitRotationC))
        for (int q = 0; q < c.width; ++q)
            for (Axis a : {Axis::X, Axis::Y, Axis::Z})
                fs.faults.push_back(InitRotation{q, a, params.theta});
    if (wants(FaultClass::InitStuck))
        for (int q = 0; q < c.width; ++q)
            for (int v : {0, 1})
                fs.faults.push_back(InitStuckPrep{q, v, params.gamma});
    if (wants(FaultClass::LostPhase))
        for (int s = 0; s < nstages; ++s) {
            for (int w : c.stages[static_cast<size_t>(s)].controls)
                fs.faults.push_back(LostPhaseControl{s, w});
            fs.faults.push_back(LostPhaseGate{s});
        }
    if (wants(FaultClass::Kick))
        for (int s = 0; s < nstages; ++s) {
            const Gate& g = c.stages[static_cast<size_t>(s)];
            if (g.kind == GateKind::KCN || g.name == "cz")
                fs.faults.push_back(PhaseKick{s, params.eps});
        }
    if (wants(FaultClass::Faded))
        for (int s = 0; s < nstages; ++s)
            for (int w : c.stages[static_cast<size_t>(s)].controls)
                fs.faults.push_back(FadedControl{s, w});
    if (wants(FaultClass::Forced))
        for (int s = 0; s < nstages; ++s)
            for (int v : {0, 1})
                fs.faults.push_back(ForcedGate{s, v});
    if (wants(FaultClass::Meas))
        for (int q = 0; q < c.width; ++q)
            for (int v : {0, 1})
                fs.faults.push_back(MeasStuck{q, v});
    if (wants(FaultClass::CzAngleC))
        for (int s = 0; s < nstages; ++s)
            if (c.stages[static_cast<size_t>(s)].name == "cz")
                fs.faults.push_back(CzAngle{s, params.phi});
    return fs;
}

// ---------------------------------------------------------------------------
// executable model

struct Step {
    enum class Kind { Gate, WireUnitary, WireChannel, DenseChannel } kind = Kind::Gate;
    Gate gate;                          // Kind::Gate
    int wire = 0;                       // WireUnitary / WireChannel
    CMatrix op;                         // WireUnitary (2x2)
    std::vector<CMatrix> kraus;         // WireChannel (2x2 each) / DenseChannel (full)
};

/// A gold or faulted circuit compiled to an evolution plan.  Preparation
/// faults live in init_steps and run before any basis-change sandwich.
struct FaultedModel {
    int width = 0;
    std::vector<Step> init_steps;
    std::vector<Step> stage_steps;
    std::vector<int> meas_override;     // per qubit: -1 none, else stuck value
    bool has_channel = false;
    std::string label;                  // textual fault form, empty for gold
};

inline FaultedModel gold_model(const Circuit& c) {
    FaultedModel m;
    m.width = c.width;
    m.meas_override.assign(static_cast<size_t>(c.width), -1);
    for (const Gate& g : c.stages) {
        Step s;
        s.kind = Step::Kind::Gate;
        s.gate = g;
        m.stage_steps.push_back(std::move(s));
    }
    return m;
}

namespace detail {

inline Step wire_unitary(int wire, const CMatrix& op) {
    Step s;
    s.kind = Step::Kind::WireUnitary;
    s.wire = wire;
    s.op = op;
    return s;
}

inline Step wire_channel(int wire, std::vector<CMatrix> kraus) {
    Step s;
    s.kind = Step::Kind::WireChannel;
    s.wire = wire;
    s.kraus = std::move(kraus);
    return s;
}

inline void check_stage(const Circuit& c, int stage) {
    if (stage < 0 || stage >= static_cast<int>(c.stages.size()))
        throw std::invalid_argument("fault references stage " + std::to_string(stage) +
                                    " outside the circuit");
}

inline void check_qubit(const Circuit& c, int q) {
    if (q < 0 || q >= c.width)
        throw std::invalid_argument("fault references qubit " + std::to_string(q) +
                                    " outside the circuit");
}

inline Gate without_control(const Gate& g, int wire) {
    Gate out = g;
    auto it = std::find(out.controls.begin(), out.controls.end(), wire);
    if (it == out.controls.end())
        throw std::invalid_argument("fault drops control wire " + std::to_string(wire) +
                                    " which the gate does not have");
    out.controls.erase(it);
    if (out.kind == GateKind::KCN && out.controls.empty()) {
        out.kind = GateKind::Single;
        out.name = "x";
    }
    return out;
}

/// The activating phase of a gate moved to exp(i*angle): a cz keeps its
/// shape with the new angle, a k-CN becomes H CPhase(angle) H on its target.
inline std::vector<Step> with_activating_phase(const Gate& g, double angle) {
    if (g.name == "cz") {
        Step s;
        s.kind = Step::Kind::Gate;
        s.gate = g;
        s.gate.param = angle;
        return {s};
    }
    if (g.kind != GateKind::KCN)
        throw std::invalid_argument("phase fault applies to cn or cz gates only");
    Gate h;
    h.kind = GateKind::Single;
    h.name = "h";
    h.target = g.target;
    Gate phase;
    phase.kind = GateKind::Single;
    phase.name = "cz";
    phase.param = angle;
    phase.has_param = true;
    phase.controls = g.controls;
    phase.target = g.target;
    std::vector<Step> out(3);
    out[0].kind = Step::Kind::Gate; out[0].gate = h;
    out[1].kind = Step::Kind::Gate; out[1].gate = phase;
    out[2].kind = Step::Kind::Gate; out[2].gate = h;
    return out;
}

/// Kraus pair for a target reset to |v> gated on the controls being active:
/// E0 = P_inactive + P_active (x) |v><v|,  E1 = P_active (x) |v><not v|.
inline std::vector<CMatrix> forced_target_kraus(const Circuit& c, const Gate& g, int v) {
    const int n = c.width;
    const Eigen::Index dim = Eigen::Index{1} << n;
    unsigned cmask = 0;
    for (int w : g.controls) cmask |= wire_bit(n, w);
    const unsigned tbit = wire_bit(n, g.target);

    CMatrix e0 = CMatrix::Zero(dim, dim);
    CMatrix e1 = CMatrix::Zero(dim, dim);
    for (unsigned k = 0; k < static_cast<unsigned>(dim); ++k) {
        const bool active = (k & cmask) == cmask;
        const int tval = (k & tbit) ? 1 : 0;
        if (!active) {
            e0(k, k) = 1.0;
        } else if (tval == v) {
            e0(k, k) = 1.0;          // already at the forced value
            e1(k, k ^ tbit) = 1.0;   // reset from the opposite value
        }
    }
    return {e0, e1};
}

} // namespace detail

/// Build the executable model of circuit `c` perturbed by fault `f`.
inline FaultedModel apply_fault(const Circuit& c, const Fault& f) {
    FaultedModel m = gold_model(c);
    m.label = fault_to_string(f);

    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PauliFault>) {
                detail::check_qubit(c, v.loc.wire);
                const int point = insertion_point(v.loc, c);
                if (point < 0 || point > static_cast<int>(c.stages.size()))
                    throw std::invalid_argument("fault location does not belong to this circuit");
                Step ins;
                if (v.p >= 1.0) {
                    ins = detail::wire_unitary(v.loc.wire, pauli(v.kind));
                } else {
                    ins = detail::wire_channel(
                        v.loc.wire, {std::sqrt(1.0 - v.p) * CMatrix::Identity(2, 2),
                                     std::sqrt(v.p) * pauli(v.kind)});
                    m.has_channel = true;
                }
                m.stage_steps.insert(m.stage_steps.begin() + point, std::move(ins));
            } else if constexpr (std::is_same_v<T, InitRotation>) {
                detail::check_qubit(c, v.qubit);
                m.init_steps.push_back(detail::wire_unitary(v.qubit, rotation(v.axis, v.theta)));
            } else if constexpr (std::is_same_v<T, InitStuckPrep>) {
                detail::check_qubit(c, v.qubit);
                const double keep = std::sqrt(1.0 - v.gamma);
                const double leak = std::sqrt(v.gamma);
                CMatrix e0(2, 2), e1(2, 2);
                if (v.stuck_to == 0) {
                    e0 << 1, 0, 0, keep;
                    e1 << 0, leak, 0, 0;
                } else {
                    e0 << keep, 0, 0, 1;
                    e1 << 0, 0, leak, 0;
                }
                m.init_steps.push_back(detail::wire_channel(v.qubit, {e0, e1}));
                m.has_channel = true;
            } else if constexpr (std::is_same_v<T, LostPhaseControl>) {
                detail::check_stage(c, v.stage);
                m.stage_steps[static_cast<size_t>(v.stage)].gate =
                    detail::without_control(c.stages[static_cast<size_t>(v.stage)], v.wire);
            } else if constexpr (std::is_same_v<T, LostPhaseGate>) {
                detail::check_stage(c, v.stage);
                m.stage_steps.erase(m.stage_steps.begin() + v.stage);
            } else if constexpr (std::is_same_v<T, PhaseKick>) {
                detail::check_stage(c, v.stage);
                auto repl = detail::with_activating_phase(c.stages[static_cast<size_t>(v.stage)],
                                                          kPi + v.eps);
                m.stage_steps.erase(m.stage_steps.begin() + v.stage);
                m.stage_steps.insert(m.stage_steps.begin() + v.stage, repl.begin(), repl.end());
            } else if constexpr (std::is_same_v<T, FadedControl>) {
                detail::check_stage(c, v.stage);
                m.stage_steps[static_cast<size_t>(v.stage)].gate =
                    detail::without_control(c.stages[static_cast<size_t>(v.stage)], v.wire);
            } else if constexpr (std::is_same_v<T, ForcedGate>) {
                detail::check_stage(c, v.stage);
                if (c.width > 6)
                    throw std::invalid_argument("forced gate channel limited to 6 qubits");
                Step s;
                s.kind = Step::Kind::DenseChannel;
                s.kraus = detail::forced_target_kraus(c, c.stages[static_cast<size_t>(v.stage)],
                                                      v.value);
                m.stage_steps[static_cast<size_t>(v.stage)] = std::move(s);
                m.has_channel = true;
            } else if constexpr (std::is_same_v<T, MeasStuck>) {
                detail::check_qubit(c, v.qubit);
                m.meas_override[static_cast<size_t>(v.qubit)] = v.value;
            } else if constexpr (std::is_same_v<T, CzAngle>) {
                detail::check_stage(c, v.stage);
                auto repl = detail::with_activating_phase(c.stages[static_cast<size_t>(v.stage)],
                                                          v.phi);
                m.stage_steps.erase(m.stage_steps.begin() + v.stage);
                m.stage_steps.insert(m.stage_steps.begin() + v.stage, repl.begin(), repl.end());
            }
        },
        f);
    return m;
}

/// Kraus completeness defect max |sum E^dag E - I| over every channel step.
inline double channel_completeness_defect(const FaultedModel& m) {
    double worst = 0.0;
    auto scan = [&](const std::vector<Step>& steps) {
        for (const Step& s : steps) {
            if (s.kind != Step::Kind::WireChannel && s.kind != Step::Kind::DenseChannel) continue;
            const Eigen::Index d = s.kraus.front().rows();
            CMatrix sum = CMatrix::Zero(d, d);
            for (const CMatrix& e : s.kraus) sum += e.adjoint() * e;
            worst = std::max(worst, (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff());
        }
    };
    scan(m.init_steps);
    scan(m.stage_steps);
    return worst;
}

} // namespace qatpg

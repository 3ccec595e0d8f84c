#pragma once

// Exact and sampled execution of gold and faulted models with Z- or X-basis
// preparation and readout.  Models without channels run on a state vector
// (width <= 10); anything with Kraus steps runs on a density matrix
// (width <= 6).  Readout is a full computational-basis measurement with the
// model's stuck values overriding the reported bits.

#include "qatpg/faults.hpp"

#include <map>
#include <random>

namespace qatpg {

enum class MeasBasis { Z, X };

inline std::string basis_name(MeasBasis b) { return b == MeasBasis::Z ? "z" : "x"; }

inline MeasBasis basis_from_string(const std::string& s) {
    if (s == "z" || s == "Z") return MeasBasis::Z;
    if (s == "x" || s == "X") return MeasBasis::X;
    throw std::invalid_argument("unknown basis \"" + s + "\"");
}

/// One test pattern: a preparation bitstring plus preparation and
/// measurement basis choices (X means a Hadamard on every wire).
struct Test {
    std::string prep;
    MeasBasis basis = MeasBasis::Z;
    MeasBasis measure = MeasBasis::Z;

    bool operator==(const Test&) const = default;
};

inline std::string test_to_string(const Test& t) {
    return t.prep + "/" + basis_name(t.basis) + "/" + basis_name(t.measure);
}

inline Test test_from_string(const std::string& s) {
    auto a = s.find('/');
    auto b = s.rfind('/');
    if (a == std::string::npos || b == a)
        throw std::invalid_argument("expected <bits>/<basis>/<basis>, got \"" + s + "\"");
    return Test{s.substr(0, a), basis_from_string(s.substr(a + 1, b - a - 1)),
                basis_from_string(s.substr(b + 1))};
}

using OutcomeDistribution = std::map<std::string, double>;

inline double tvd(const OutcomeDistribution& a, const OutcomeDistribution& b) {
    double sum = 0.0;
    for (const auto& [k, p] : a) {
        auto it = b.find(k);
        sum += std::abs(p - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, q] : b)
        if (!a.count(k)) sum += q;
    return sum / 2.0;
}

// ---------------------------------------------------------------------------
// density helpers

namespace detail {

inline void apply_gate_density(CMatrix& rho, const Gate& g, int n) {
    const Eigen::Index dim = rho.rows();
    CVector col(dim);
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            col = rho.col(j);
            apply_gate(col, g, n);
            rho.col(j) = col;
        }
        rho.adjointInPlace();
    }
}

inline void apply_wire_op_density(CMatrix& rho, const CMatrix& op, int wire, int n) {
    const Eigen::Index dim = rho.rows();
    CVector col(dim);
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            col = rho.col(j);
            apply_wire_op(col, op, wire, n);
            rho.col(j) = col;
        }
        rho.adjointInPlace();
    }
}

inline void apply_step_density(CMatrix& rho, const Step& s, int n) {
    switch (s.kind) {
        case Step::Kind::Gate:
            apply_gate_density(rho, s.gate, n);
            break;
        case Step::Kind::WireUnitary:
            apply_wire_op_density(rho, s.op, s.wire, n);
            break;
        case Step::Kind::WireChannel: {
            CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
            for (const CMatrix& e : s.kraus) {
                CMatrix full = embed_on_wire(e, s.wire, n);
                out += full * rho * full.adjoint();
            }
            rho = std::move(out);
            break;
        }
        case Step::Kind::DenseChannel: {
            CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
            for (const CMatrix& e : s.kraus) out += e * rho * e.adjoint();
            rho = std::move(out);
            break;
        }
    }
}

inline void apply_step_vector(CVector& amp, const Step& s, int n) {
    switch (s.kind) {
        case Step::Kind::Gate:
            apply_gate(amp, s.gate, n);
            break;
        case Step::Kind::WireUnitary:
            apply_wire_op(amp, s.op, s.wire, n);
            break;
        default:
            throw std::logic_error("channel step on the state-vector path");
    }
}

inline void hadamard_all_vector(CVector& amp, int n) {
    const CMatrix h = hadamard();
    for (int w = 0; w < n; ++w) apply_wire_op(amp, h, w, n);
}

inline void hadamard_all_density(CMatrix& rho, int n) {
    const CMatrix h = hadamard();
    for (int w = 0; w < n; ++w) apply_wire_op_density(rho, h, w, n);
}

inline OutcomeDistribution collect_outcomes(const Eigen::VectorXd& probs,
                                            const std::vector<int>& override, int n) {
    OutcomeDistribution dist;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        double p = probs(k);
        if (p <= 1e-12) continue;
        std::string bits = index_to_bits(n, static_cast<unsigned>(k));
        for (int w = 0; w < n; ++w)
            if (override[static_cast<size_t>(w)] >= 0)
                bits[static_cast<size_t>(w)] = static_cast<char>('0' + override[static_cast<size_t>(w)]);
        dist[bits] += p;
    }
    return dist;
}

} // namespace detail

// ---------------------------------------------------------------------------
// exact execution

/// Apply the model's preparation and stage steps to a density operator.
/// No basis sandwich and no readout; trace and Hermiticity are preserved.
inline CMatrix evolve_density(const FaultedModel& m, const CMatrix& rho_in) {
    if (!is_density(rho_in, 1e-8))
        throw std::invalid_argument("evolve_density: input is not a density matrix");
    if (rho_in.rows() != (Eigen::Index{1} << m.width))
        throw std::invalid_argument("evolve_density: dimension mismatch");
    CMatrix rho = rho_in;
    for (const Step& s : m.init_steps) detail::apply_step_density(rho, s, m.width);
    for (const Step& s : m.stage_steps) detail::apply_step_density(rho, s, m.width);
    return rho;
}

inline OutcomeDistribution run_exact(const FaultedModel& m, const Test& t) {
    const int n = m.width;
    if (static_cast<int>(t.prep.size()) != n)
        throw std::invalid_argument("run_exact: preparation width mismatch");
    const unsigned prep = bits_to_index(t.prep);

    if (!m.has_channel) {
        if (n > 10) throw std::invalid_argument("run_exact: state-vector path limited to 10 qubits");
        CVector amp = basis_ket(Eigen::Index{1} << n, prep);
        for (const Step& s : m.init_steps) detail::apply_step_vector(amp, s, n);
        if (t.basis == MeasBasis::X) detail::hadamard_all_vector(amp, n);
        for (const Step& s : m.stage_steps) detail::apply_step_vector(amp, s, n);
        if (t.measure == MeasBasis::X) detail::hadamard_all_vector(amp, n);
        return detail::collect_outcomes(amp.cwiseAbs2(), m.meas_override, n);
    }

    if (n > 6) throw std::invalid_argument("run_exact: density path limited to 6 qubits");
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix rho = CMatrix::Zero(dim, dim);
    rho(prep, prep) = 1.0;
    for (const Step& s : m.init_steps) detail::apply_step_density(rho, s, n);
    if (t.basis == MeasBasis::X) detail::hadamard_all_density(rho, n);
    for (const Step& s : m.stage_steps) detail::apply_step_density(rho, s, n);
    if (t.measure == MeasBasis::X) detail::hadamard_all_density(rho, n);
    Eigen::VectorXd probs = rho.diagonal().real().cwiseMax(0.0);
    return detail::collect_outcomes(probs, m.meas_override, n);
}

inline OutcomeDistribution run_exact(const Circuit& c, const Test& t) {
    return run_exact(gold_model(c), t);
}

// ---------------------------------------------------------------------------
// sampling

/// Multinomial sample of the exact distribution.  Uses mt19937_64 seeded as
/// given, one draw per shot mapped to [0,1) by the top 53 bits, walked
/// through the distribution in key order; identical seeds give identical
/// counts on every platform.
inline std::map<std::string, long> run_shots(const FaultedModel& m, const Test& t,
                                             long shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("run_shots: need at least one shot");
    const OutcomeDistribution dist = run_exact(m, t);
    std::mt19937_64 rng(seed);
    std::map<std::string, long> counts;
    for (long i = 0; i < shots; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double cum = 0.0;
        const std::string* last = nullptr;
        for (const auto& [bits, p] : dist) {
            cum += p;
            last = &bits;
            if (u < cum) break;
        }
        ++counts[*last];
    }
    return counts;
}

inline std::map<std::string, long> run_shots(const Circuit& c, const Test& t, long shots,
                                             std::uint64_t seed) {
    return run_shots(gold_model(c), t, shots, seed);
}

/// Most frequent bitstring; ties resolve to the lexicographically smallest.
inline std::string majority_vote(const std::map<std::string, long>& counts) {
    if (counts.empty()) throw std::invalid_argument("majority_vote: empty counts");
    const std::string* best = nullptr;
    long best_count = -1;
    for (const auto& [bits, cnt] : counts)
        if (cnt > best_count) {   // map order is lexicographic, so first max wins ties
            best = &bits;
            best_count = cnt;
        }
    return *best;
}

// ---------------------------------------------------------------------------
// phase signature

/// Per-term sign of the state the model produces from the X-basis
/// preparation of `prep`, normalized so the first populated term reads +1.
/// Requires a channel-free model whose output has uniform magnitudes and
/// purely real relative phases; anything else is reported as inapplicable.
inline std::map<std::string, int> phase_signature(const FaultedModel& m, const std::string& prep) {
    if (m.has_channel)
        throw std::invalid_argument("phase_signature: model is not unitary");
    const int n = m.width;
    if (static_cast<int>(prep.size()) != n)
        throw std::invalid_argument("phase_signature: preparation width mismatch");

    const Eigen::Index dim = Eigen::Index{1} << n;
    CVector amp = basis_ket(dim, bits_to_index(prep));
    for (const Step& s : m.init_steps) detail::apply_step_vector(amp, s, n);
    detail::hadamard_all_vector(amp, n);
    for (const Step& s : m.stage_steps) detail::apply_step_vector(amp, s, n);

    const double mag = 1.0 / std::sqrt(static_cast<double>(dim));
    const double tol = 1e-9;
    for (Eigen::Index k = 0; k < dim; ++k)
        if (std::abs(std::abs(amp(k)) - mag) > tol)
            throw std::domain_error("phase_signature: state is not a uniform +-1 phase pattern");

    const Complex ref = amp(0) / std::abs(amp(0));
    std::map<std::string, int> signs;
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Complex r = amp(k) / (ref * mag);
        if (std::abs(r.imag()) > 1e-9 || std::abs(std::abs(r.real()) - 1.0) > 1e-9)
            throw std::domain_error("phase_signature: relative phase is not +-1");
        signs[index_to_bits(n, static_cast<unsigned>(k))] = r.real() > 0 ? 1 : -1;
    }
    return signs;
}

} // namespace qatpg

#pragma once

// Distance measures and small-scale tomography: fidelity, trace distance,
// Bures and angle metrics, worst-case process comparison over an operator
// basis input set, Pauli-expansion state reconstruction, and linear
// inversion process characterization for one and two qubits.

#include "qatpg/simulator.hpp"

#include <functional>

namespace qatpg {

namespace detail {

inline void require_density(const CMatrix& m, const char* who) {
    if (!is_density(m, 1e-8))
        throw std::invalid_argument(std::string(who) + ": input is not a density matrix");
}

} // namespace detail

// ---------------------------------------------------------------------------
// state distance measures

/// F(rho, sigma) = tr(sqrt(sqrt(rho) sigma sqrt(rho)))^2
inline double fidelity(const CMatrix& rho, const CMatrix& sigma) {
    detail::require_density(rho, "fidelity");
    detail::require_density(sigma, "fidelity");
    const CMatrix root = matrix_sqrt_psd(rho);
    CMatrix inner = root * sigma * root;
    inner = (inner + inner.adjoint()) / 2.0;   // symmetrize roundoff
    const double tr = matrix_sqrt_psd(inner).trace().real();
    return std::clamp(tr * tr, 0.0, 1.0);
}

/// D(rho, sigma) = tr|rho - sigma| / 2
inline double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
    detail::require_density(rho, "trace_distance");
    detail::require_density(sigma, "trace_distance");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho - sigma, Eigen::EigenvaluesOnly);
    return std::clamp(es.eigenvalues().cwiseAbs().sum() / 2.0, 0.0, 1.0);
}

inline double bures(const CMatrix& rho, const CMatrix& sigma) {
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(fidelity(rho, sigma))));
}

inline double angle(const CMatrix& rho, const CMatrix& sigma) {
    return std::acos(std::clamp(std::sqrt(fidelity(rho, sigma)), 0.0, 1.0));
}

// ---------------------------------------------------------------------------
// operator basis input sets

/// Preparation states plus measurement bras spanning the operator space.
struct OperatorBasisSet {
    int n = 1;
    std::vector<CVector> states;
    std::vector<CVector> projectors;   // kets of the measurement bras
};

namespace detail {

inline CVector named_ket1(const std::string& name) {
    const Complex i(0.0, 1.0);
    CVector v(2);
    if (name == "0") { v << 1, 0; return v; }
    if (name == "1") { v << 0, 1; return v; }
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "+") { v << r, r; return v; }
    if (name == "-") { v << r, -r; return v; }
    if (name == "y+") { v << r, r * i; return v; }
    if (name == "y-") { v << r, -r * i; return v; }
    throw std::invalid_argument("unknown ket label \"" + name + "\"");
}

inline CVector labeled_ket(const std::string& labels) {
    // greedy tokenization: y+ / y- / 0 / 1 / + / -
    CVector out = CVector::Ones(1);
    size_t i = 0;
    while (i < labels.size()) {
        std::string tok;
        if (labels[i] == 'y' && i + 1 < labels.size() &&
            (labels[i + 1] == '+' || labels[i + 1] == '-')) {
            tok = labels.substr(i, 2);
            i += 2;
        } else {
            tok = labels.substr(i, 1);
            i += 1;
        }
        CVector next = named_ket1(tok);
        CVector merged(out.size() * 2);
        for (Eigen::Index a = 0; a < out.size(); ++a) {
            merged(2 * a) = out(a) * next(0);
            merged(2 * a + 1) = out(a) * next(1);
        }
        out = std::move(merged);
    }
    return out;
}

} // namespace detail

/// The fixed preparation and measurement sets used for one- and two-qubit
/// process characterization; the two-qubit set has the full 16 states.
inline OperatorBasisSet default_basis(int n) {
    OperatorBasisSet b;
    b.n = n;
    if (n == 1) {
        for (const char* s : {"0", "1", "+", "y+"}) b.states.push_back(detail::labeled_ket(s));
        for (const char* s : {"0", "1", "+", "y+"}) b.projectors.push_back(detail::labeled_ket(s));
        return b;
    }
    if (n == 2) {
        for (const char* s : {"00", "01", "10", "11", "0+", "0y-", "1y-", "1+", "++", "y+y-",
                              "y++", "+y+", "+1", "y+1", "+0", "y+0"})
            b.states.push_back(detail::labeled_ket(s));
        for (const char* s : {"00", "10", "+1", "y-0", "y-1", "11", "01", "0-", "0y-", "y-y-",
                              "y--", "+-", "+y+", "1-", "1y-", "+0"})
            b.projectors.push_back(detail::labeled_ket(s));
        return b;
    }
    throw std::invalid_argument("default_basis: only 1 and 2 qubits supported");
}

// ---------------------------------------------------------------------------
// process maps

/// Linear map on vectorized (column-major) density operators.
struct ProcessMap {
    int n = 1;
    CMatrix superop;   // d^2 x d^2

    CMatrix apply(const CMatrix& rho) const {
        const Eigen::Index d = rho.rows();
        CVector vec(d * d);
        for (Eigen::Index c = 0; c < d; ++c) vec.segment(c * d, d) = rho.col(c);
        CVector out = superop * vec;
        CMatrix res(d, d);
        for (Eigen::Index c = 0; c < d; ++c) res.col(c) = out.segment(c * d, d);
        return res;
    }
};

/// vec(U rho U^dag) = (conj(U) kron U) vec(rho)
inline ProcessMap process_of_unitary(const CMatrix& u) {
    const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(u.rows()))));
    return ProcessMap{n, kron(u.conjugate(), u)};
}

inline ProcessMap process_of_kraus(const std::vector<CMatrix>& kraus) {
    const Eigen::Index d = kraus.front().rows();
    const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(d))));
    CMatrix s = CMatrix::Zero(d * d, d * d);
    for (const CMatrix& e : kraus) s += kron(e.conjugate(), e);
    return ProcessMap{n, s};
}

/// Worst-case fidelity of `real` against `ideal` over the given input set.
inline double s_fidelity(const ProcessMap& real, const ProcessMap& ideal,
                         const OperatorBasisSet& inputs) {
    if (real.n != ideal.n || real.n != inputs.n)
        throw std::invalid_argument("s_fidelity: dimension mismatch");
    double worst = 1.0;
    for (const CVector& psi : inputs.states) {
        const CMatrix rho = psi * psi.adjoint();
        worst = std::min(worst, fidelity(real.apply(rho), ideal.apply(rho)));
    }
    return worst;
}

/// Worst-case trace distance of `real` against `ideal` over the input set.
inline double s_distance(const ProcessMap& real, const ProcessMap& ideal,
                         const OperatorBasisSet& inputs) {
    if (real.n != ideal.n || real.n != inputs.n)
        throw std::invalid_argument("s_distance: dimension mismatch");
    double worst = 0.0;
    for (const CVector& psi : inputs.states) {
        const CMatrix rho = psi * psi.adjoint();
        worst = std::max(worst, trace_distance(real.apply(rho), ideal.apply(rho)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// state tomography

/// Tensor product of single-qubit Paulis named by a string over I X Y Z,
/// leftmost letter on wire 0.
inline CMatrix pauli_string_matrix(const std::string& s) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (char c : s) out = kron(out, pauli(pauli_kind_from_char(c)));
    return out;
}

inline std::vector<std::string> all_pauli_strings(int n) {
    std::vector<std::string> out{""};
    for (int w = 0; w < n; ++w) {
        std::vector<std::string> next;
        next.reserve(out.size() * 4);
        for (const auto& base : out)
            for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(base + c);
        out = std::move(next);
    }
    return out;
}

/// Exact expectation values tr(P rho) for every Pauli string.
inline std::map<std::string, double> pauli_expectations(const CMatrix& rho) {
    const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(rho.rows()))));
    std::map<std::string, double> out;
    for (const auto& s : all_pauli_strings(n))
        out[s] = (pauli_string_matrix(s) * rho).trace().real();
    return out;
}

/// rho = 2^-n * sum_P <P> P over all 4^n Pauli strings.
inline CMatrix state_tomography(const std::map<std::string, double>& expectations, int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix rho = CMatrix::Zero(dim, dim);
    for (const auto& s : all_pauli_strings(n)) {
        auto it = expectations.find(s);
        if (it == expectations.end())
            throw std::invalid_argument("state_tomography: missing observable \"" + s + "\"");
        rho += it->second * pauli_string_matrix(s);
    }
    return rho / static_cast<double>(dim);
}

// ---------------------------------------------------------------------------
// process characterization

/// Reconstruct the superoperator of a black-box channel by linear inversion
/// from its action on an operator-basis input set.
inline ProcessMap process_characterize(const std::function<CMatrix(const CMatrix&)>& channel,
                                       int n, const OperatorBasisSet* basis = nullptr) {
    const OperatorBasisSet own = basis ? OperatorBasisSet{} : default_basis(n);
    const OperatorBasisSet& b = basis ? *basis : own;
    if (b.n != n) throw std::invalid_argument("process_characterize: basis dimension mismatch");

    const Eigen::Index d = Eigen::Index{1} << n;
    const Eigen::Index d2 = d * d;
    if (static_cast<Eigen::Index>(b.states.size()) < d2)
        throw std::invalid_argument("process_characterize: basis does not span the operator space");

    CMatrix in(d2, static_cast<Eigen::Index>(b.states.size()));
    CMatrix out(d2, static_cast<Eigen::Index>(b.states.size()));
    auto vec_into = [&](CMatrix& dst, Eigen::Index col, const CMatrix& m) {
        for (Eigen::Index c = 0; c < d; ++c) dst.block(c * d, col, d, 1) = m.col(c);
    };
    for (size_t k = 0; k < b.states.size(); ++k) {
        const CMatrix rho = b.states[k] * b.states[k].adjoint();
        vec_into(in, static_cast<Eigen::Index>(k), rho);
        vec_into(out, static_cast<Eigen::Index>(k), channel(rho));
    }

    Eigen::FullPivLU<CMatrix> lu(in * in.adjoint());
    lu.setThreshold(1e-9);
    if (lu.rank() < d2)
        throw std::invalid_argument("process_characterize: rank-deficient input basis");
    // least squares through the normal equations; exact when the basis spans
    CMatrix s = out * in.adjoint() * lu.inverse();
    return ProcessMap{n, std::move(s)};
}

} // namespace qatpg

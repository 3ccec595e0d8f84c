#pragma once

// Dense complex linear algebra at small fixed dimension, plus the named
// gates and matrices used throughout the library.  Everything is a plain
// Eigen dynamic matrix; qubit 0 is the top wire and maps to the most
// significant bit of a basis index.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qatpg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// basis helpers

inline CVector basis_ket(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim)
        throw std::invalid_argument("basis_ket: index out of range");
    CVector v = CVector::Zero(dim);
    v(index) = 1.0;
    return v;
}

// bit of `wire` inside an n-qubit basis index (wire 0 = most significant)
inline unsigned wire_bit(int n, int wire) {
    return 1u << (n - 1 - wire);
}

inline std::string index_to_bits(int n, unsigned index) {
    std::string s(static_cast<size_t>(n), '0');
    for (int w = 0; w < n; ++w)
        if (index & wire_bit(n, w)) s[static_cast<size_t>(w)] = '1';
    return s;
}

inline unsigned bits_to_index(const std::string& bits) {
    unsigned idx = 0;
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bits_to_index: expected a 0/1 string, got \"" + bits + "\"");
        idx = (idx << 1) | static_cast<unsigned>(c - '0');
    }
    return idx;
}

// ---------------------------------------------------------------------------
// elementary operations

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CMatrix dagger(const CMatrix& a) {
    return a.adjoint();
}

/// Trace out subsystem `traced` of an operator over subsystems of the given
/// dimensions.  The total trace is preserved.
inline CMatrix partial_trace(const CMatrix& rho, const std::vector<int>& dims, int traced) {
    Eigen::Index total = 1;
    for (int d : dims) total *= d;
    if (rho.rows() != rho.cols() || rho.rows() != total)
        throw std::invalid_argument("partial_trace: operator dimension does not match subsystem dims");
    if (traced < 0 || traced >= static_cast<int>(dims.size()))
        throw std::invalid_argument("partial_trace: traced subsystem out of range");

    const int dt = dims[static_cast<size_t>(traced)];
    const Eigen::Index keep = total / dt;

    // stride of the traced subsystem and of everything to its right
    Eigen::Index right = 1;
    for (size_t k = static_cast<size_t>(traced) + 1; k < dims.size(); ++k)
        right *= dims[k];
    const Eigen::Index stride = right;           // step between traced values
    const Eigen::Index block = stride * dt;      // span of (traced + right) part

    auto full_index = [&](Eigen::Index kept, int t) {
        const Eigen::Index hi = kept / right;
        const Eigen::Index lo = kept % right;
        return hi * block + static_cast<Eigen::Index>(t) * stride + lo;
    };

    CMatrix out = CMatrix::Zero(keep, keep);
    for (Eigen::Index r = 0; r < keep; ++r)
        for (Eigen::Index c = 0; c < keep; ++c)
            for (int t = 0; t < dt; ++t)
                out(r, c) += rho(full_index(r, t), full_index(c, t));
    return out;
}

// ---------------------------------------------------------------------------
// named matrices

enum class PauliKind { X, Y, Z, I };

inline CMatrix pauli(PauliKind kind) {
    CMatrix m(2, 2);
    const Complex i(0.0, 1.0);
    switch (kind) {
        case PauliKind::X: m << 0, 1, 1, 0; break;
        case PauliKind::Y: m << 0, i, -i, 0; break;
        case PauliKind::Z: m << 1, 0, 0, -1; break;
        case PauliKind::I: m << 1, 0, 0, 1; break;
    }
    return m;
}

inline PauliKind pauli_kind_from_char(char c) {
    switch (c) {
        case 'x': case 'X': return PauliKind::X;
        case 'y': case 'Y': return PauliKind::Y;
        case 'z': case 'Z': return PauliKind::Z;
        case 'i': case 'I': return PauliKind::I;
    }
    throw std::invalid_argument(std::string("pauli: unknown kind '") + c + "'");
}

enum class Axis { X, Y, Z };

inline char axis_char(Axis a) {
    return a == Axis::X ? 'x' : (a == Axis::Y ? 'y' : 'z');
}

inline Axis axis_from_char(char c) {
    switch (c) {
        case 'x': case 'X': return Axis::X;
        case 'y': case 'Y': return Axis::Y;
        case 'z': case 'Z': return Axis::Z;
    }
    throw std::invalid_argument(std::string("rotation: unknown axis '") + c + "'");
}

inline CMatrix rotation(Axis axis, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const Complex i(0.0, 1.0);
    CMatrix m(2, 2);
    switch (axis) {
        case Axis::X: m << c, -i * s, -i * s, c; break;
        case Axis::Y: m << c, -s, s, c; break;
        case Axis::Z: m << std::exp(-i * (angle / 2.0)), 0, 0, std::exp(i * (angle / 2.0)); break;
    }
    return m;
}

inline CMatrix hadamard() {
    CMatrix m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

/// V is normalized so that V*V equals pauli X exactly.
inline CMatrix v_gate() {
    CMatrix m(2, 2);
    const Complex a(0.5, 0.5), b(0.5, -0.5);
    m << a, b, b, a;
    return m;
}

inline CMatrix v_dagger() {
    return v_gate().adjoint();
}

/// 2^k-th root of NOT: H * diag(1, exp(i*pi/2^k)) * H.  Satisfies
/// root_of_not(k)^(2^k) == pauli X with no residual global phase.
inline CMatrix root_of_not(int k) {
    if (k < 0 || k > 30) throw std::invalid_argument("root_of_not: bad order");
    const Complex p = std::exp(Complex(0.0, kPi / static_cast<double>(1u << k)));
    CMatrix m(2, 2);
    m << (1.0 + p) / 2.0, (1.0 - p) / 2.0, (1.0 - p) / 2.0, (1.0 + p) / 2.0;
    return m;
}

/// Two-qubit controlled phase: identity except for exp(i*phi) on |11>.
inline CMatrix cz_gate(double phi) {
    CMatrix m = CMatrix::Identity(4, 4);
    m(3, 3) = std::exp(Complex(0.0, phi));
    return m;
}

inline CMatrix cn_gate() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(2, 3) = 1;
    m(3, 2) = 1;
    return m;
}

/// Name-based dispatch used by the CLI; accepts h, x, y, z, v, vdag, cn,
/// cz(phi), rnot(k), rnotdag(k).
inline CMatrix gate(const std::string& name) {
    auto paren = name.find('(');
    std::string head = name.substr(0, paren);
    double arg = 0.0;
    bool has_arg = false;
    if (paren != std::string::npos) {
        auto close = name.find(')', paren);
        if (close == std::string::npos)
            throw std::invalid_argument("gate: missing ')' in \"" + name + "\"");
        arg = std::stod(name.substr(paren + 1, close - paren - 1));
        has_arg = true;
    }
    if (head == "h" || head == "H") return hadamard();
    if (head == "x" || head == "X") return pauli(PauliKind::X);
    if (head == "y" || head == "Y") return pauli(PauliKind::Y);
    if (head == "z" || head == "Z") return pauli(PauliKind::Z);
    if (head == "v" || head == "V") return v_gate();
    if (head == "vdag" || head == "Vdag") return v_dagger();
    if (head == "cn" || head == "CN") return cn_gate();
    if (head == "cz" || head == "CZ") return cz_gate(has_arg ? arg : kPi);
    if (head == "rnot") return root_of_not(static_cast<int>(arg));
    if (head == "rnotdag") return root_of_not(static_cast<int>(arg)).adjoint().eval();
    throw std::invalid_argument("gate: unknown gate \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// predicates and comparisons

inline bool is_unitary(const CMatrix& u, double tol = 1e-12) {
    if (u.rows() != u.cols()) return false;
    return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_hermitian(const CMatrix& m, double tol = 1e-9) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_density(const CMatrix& m, double tol = 1e-8) {
    if (!is_hermitian(m, tol)) return false;
    if (std::abs(m.trace().real() - 1.0) > tol || std::abs(m.trace().imag()) > tol) return false;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

/// Entrywise comparison; with `up_to_phase` the right side is first aligned
/// with the left by the phase of the largest entry.
inline bool approx_equal(const CMatrix& a, const CMatrix& b, double tol = 1e-12,
                         bool up_to_phase = false) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (!up_to_phase)
        return (a - b).cwiseAbs().maxCoeff() <= tol;
    Eigen::Index r = 0, c = 0;
    a.cwiseAbs().maxCoeff(&r, &c);
    if (std::abs(a(r, c)) < 1e-12 || std::abs(b(r, c)) < 1e-12)
        return (a - b).cwiseAbs().maxCoeff() <= tol;
    Complex phase = a(r, c) / b(r, c);
    phase /= std::abs(phase);
    return (a - phase * b).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// spectral helpers

/// Hermitian PSD square root.  Eigenvalues in [-1e-10, 0) are clamped to 0;
/// anything more negative violates the precondition.
inline CMatrix matrix_sqrt_psd(const CMatrix& m) {
    if (!is_hermitian(m, 1e-9))
        throw std::invalid_argument("matrix_sqrt_psd: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10)
            throw std::invalid_argument("matrix_sqrt_psd: input has a negative eigenvalue");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

// ---------------------------------------------------------------------------
// embeddings over n wires

/// I tensor ... tensor op tensor ... tensor I with `op` on `wire`.
inline CMatrix embed_on_wire(const CMatrix& op, int wire, int n) {
    if (op.rows() != 2 || op.cols() != 2)
        throw std::invalid_argument("embed_on_wire: expected a single-qubit operator");
    if (wire < 0 || wire >= n)
        throw std::invalid_argument("embed_on_wire: wire out of range");
    CMatrix out = CMatrix::Identity(1, 1);
    for (int w = 0; w < n; ++w)
        out = kron(out, w == wire ? op : CMatrix::Identity(2, 2));
    return out;
}

/// Full 2^n matrix applying `op` to `target` when all control wires read 1.
inline CMatrix controlled_on_wires(const CMatrix& op, const std::vector<int>& controls,
                                   int target, int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    unsigned cmask = 0;
    for (int c : controls) cmask |= wire_bit(n, c);
    const unsigned tbit = wire_bit(n, target);
    CMatrix out = CMatrix::Identity(dim, dim);
    for (unsigned k = 0; k < static_cast<unsigned>(dim); ++k) {
        if ((k & cmask) != cmask || (k & tbit)) continue;
        const unsigned k1 = k | tbit;
        out(k, k) = op(0, 0);
        out(k, k1) = op(0, 1);
        out(k1, k) = op(1, 0);
        out(k1, k1) = op(1, 1);
    }
    return out;
}

} // namespace qatpg

#pragma once

#include "qatpg/atpg.hpp"

#include <random>

namespace test_helpers {

using namespace qatpg;

inline std::mt19937_64 fixed_rng(std::uint64_t salt = 0) {
    return std::mt19937_64(0x51ab5e3d00c0ffeeull ^ salt);
}

inline Complex random_complex(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return {g(rng), g(rng)};
}

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = random_complex(rng);
    return m;
}

// Ginibre construction: G G^dag normalized to unit trace
inline CMatrix random_density(int n, std::mt19937_64& rng) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix g = random_matrix(dim, dim, rng);
    CMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline CVector random_pure(int n, std::mt19937_64& rng) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = random_complex(rng);
    return v / v.norm();
}

inline CMatrix hadamard_all(int n) {
    CMatrix h = CMatrix::Identity(1, 1);
    for (int w = 0; w < n; ++w) h = kron(h, hadamard());
    return h;
}

// independent permutation-matrix oracle for a k-CN over k+1 wires
inline CMatrix kcn_permutation_oracle(int k) {
    const int n = k + 1;
    const unsigned dim = 1u << n;
    CMatrix u = CMatrix::Zero(dim, dim);
    for (unsigned j = 0; j < dim; ++j) {
        bool active = true;
        for (int c = 0; c < k; ++c)
            if (!(j & (1u << (n - 1 - c)))) { active = false; break; }
        unsigned i = active ? (j ^ 1u) : j;   // target is the last wire (lsb)
        u(i, j) = 1.0;
    }
    return u;
}

inline double prob_of(const OutcomeDistribution& d, const std::string& bits) {
    auto it = d.find(bits);
    return it == d.end() ? 0.0 : it->second;
}

inline bool is_point_mass(const OutcomeDistribution& d, const std::string& bits, double tol = 1e-9) {
    return d.size() == 1 && std::abs(prob_of(d, bits) - 1.0) <= tol;
}

} // namespace test_helpers

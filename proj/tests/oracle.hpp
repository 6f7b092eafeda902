#pragma once

// Dense Fock-space oracle used by the tests. Everything is built from the
// explicit creation-operator matrices below; none of the library's sign or
// application logic is reused, so agreement is a two-route check.

#include <Eigen/Dense>
#include <bit>
#include <cstdint>

#include "fluidfrag/fock_space.hpp"
#include "fluidfrag/tensors.hpp"

namespace oracle {

// a^dag_p |b> = (-1)^{popcount of occupied modes below p} |b + p>, 0 if occupied
inline Eigen::MatrixXd creation(int n, int p) {
    const int dim = 1 << n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int b = 0; b < dim; ++b) {
        if ((b >> p) & 1) continue;
        const int sign = (std::popcount(static_cast<unsigned>(b) & ((1u << p) - 1)) & 1) ? -1 : 1;
        m(b | (1 << p), b) = sign;
    }
    return m;
}

inline Eigen::MatrixXd annihilation(int n, int p) { return creation(n, p).transpose(); }

inline Eigen::MatrixXd excitation(int n, int p, int q) {
    return creation(n, p) * annihilation(n, q);
}

inline Eigen::MatrixXd number_op(int n, int p) { return excitation(n, p, p); }

inline Eigen::MatrixXd one_body(const Eigen::MatrixXd& t) {
    const int n = static_cast<int>(t.rows());
    const int dim = 1 << n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (t(p, q) != 0.0) m += t(p, q) * excitation(n, p, q);
    return m;
}

inline Eigen::MatrixXd two_body_tensor(const fluidfrag::FourIndex& g) {
    const int n = g.dim();
    const int dim = 1 << n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            Eigen::MatrixXd left = excitation(n, p, q);
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    if (g(p, q, r, s) != 0.0) m += g(p, q, r, s) * left * excitation(n, r, s);
        }
    return m;
}

inline Eigen::MatrixXd spatial_hamiltonian(const fluidfrag::SpatialTensors& t) {
    using fluidfrag::SpinTensors;
    const SpinTensors spin = SpinTensors::from_spatial(t);
    return one_body(spin.h) + two_body_tensor(spin.g);
}

inline Eigen::VectorXd embed(const fluidfrag::SectorBasis& basis, const Eigen::VectorXd& amps) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(1 << basis.n_spin_orbitals());
    for (size_t i = 0; i < basis.size(); ++i)
        full(static_cast<Eigen::Index>(basis.word(i))) = amps(static_cast<Eigen::Index>(i));
    return full;
}

inline Eigen::MatrixXd sector_matrix(const Eigen::MatrixXd& full,
                                     const fluidfrag::SectorBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            m(i, j) = full(static_cast<Eigen::Index>(basis.word(i)),
                           static_cast<Eigen::Index>(basis.word(j)));
    return m;
}

inline double expectation(const Eigen::MatrixXd& op_full, const fluidfrag::ProxyState& s) {
    const Eigen::VectorXd v = embed(*s.basis, s.amplitudes);
    return v.dot(op_full * v);
}

inline double covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const fluidfrag::ProxyState& s) {
    const Eigen::VectorXd v = embed(*s.basis, s.amplitudes);
    return v.dot(a * b * v) - v.dot(a * v) * v.dot(b * v);
}

}  // namespace oracle

#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>

#include "fluidfrag/fcidump.hpp"
#include "fluidfrag/fock_space.hpp"
#include "fluidfrag/rng.hpp"
#include "fluidfrag/tensors.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
    return std::string(FLUIDFRAG_FIXTURE_DIR) + "/" + name;
}

struct Problem {
    fluidfrag::SpatialTensors tensors;
    std::shared_ptr<fluidfrag::SectorBasis> basis;
    fluidfrag::TwoBodyOperator hamiltonian;
};

inline const Problem& load(const std::string& name) {
    static std::map<std::string, Problem> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        Problem p;
        p.tensors = fluidfrag::to_chemist(fluidfrag::parse_fcidump_file(fixture(name)));
        p.basis = std::make_shared<fluidfrag::SectorBasis>(fluidfrag::SectorBasis::full_sector(
            p.tensors.n_spin_orbitals(), p.tensors.n_electrons));
        p.hamiltonian = fluidfrag::TwoBodyOperator::from_spatial(p.tensors);
        it = cache.emplace(name, std::move(p)).first;
    }
    return it->second;
}

inline Eigen::MatrixXd random_symmetric(int n, uint64_t seed) {
    fluidfrag::CounterRng rng(seed, 0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
    return m;
}

// special-orthogonal via QR of a random matrix, det fixed to +1
inline Eigen::MatrixXd random_orthogonal(int n, uint64_t seed) {
    fluidfrag::CounterRng rng(seed, 1);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
}

inline Eigen::VectorXd random_state(size_t dim, uint64_t seed) {
    fluidfrag::CounterRng rng(seed, 2);
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-1.0, 1.0);
    v.normalize();
    return v;
}

inline fluidfrag::ProxyState make_state(std::shared_ptr<const fluidfrag::SectorBasis> basis,
                                        Eigen::VectorXd amps) {
    fluidfrag::ProxyState s;
    s.basis = std::move(basis);
    s.amplitudes = std::move(amps);
    s.kind = fluidfrag::ProxyKind::FCI;
    s.energy = 0.0;
    return s;
}

}  // namespace testutil

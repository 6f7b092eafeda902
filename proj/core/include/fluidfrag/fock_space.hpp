#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fluidfrag/tensors.hpp"

namespace fluidfrag {

/// Ordered occupation-number basis of a fixed electron-number sector.
/// Words are N-bit integers, bit p = occupation of spin-orbital p, stored
/// strictly increasing.
class SectorBasis {
   public:
    static SectorBasis full_sector(int n_spin_orbitals, int n_electrons);

    /// Words of the sector within `max_excitation` of `reference`
    /// (Hamming distance / 2).
    static SectorBasis excitation_truncated(int n_spin_orbitals, int n_electrons,
                                            uint64_t reference, int max_excitation);

    int n_spin_orbitals() const { return n_modes_; }
    int n_electrons() const { return n_electrons_; }
    size_t size() const { return words_.size(); }
    uint64_t word(size_t idx) const { return words_[idx]; }
    const std::vector<uint64_t>& words() const { return words_; }

    /// Position of a word, or npos when outside the basis.
    size_t index_of(uint64_t w) const;
    static constexpr size_t npos = static_cast<size_t>(-1);

   private:
    SectorBasis(int n_modes, int n_electrons, std::vector<uint64_t> words);
    int n_modes_ = 0;
    int n_electrons_ = 0;
    std::vector<uint64_t> words_;
};

enum class ProxyKind { HF, CISD, FCI };
const char* to_string(ProxyKind k);

/// Normalized real state over a SectorBasis.
struct ProxyState {
    std::shared_ptr<const SectorBasis> basis;
    Eigen::VectorXd amplitudes;
    ProxyKind kind = ProxyKind::HF;
    double energy = 0.0;  // electronic, Hartree

    void validate() const;
};

/// sum_pq t_pq E_p^q with symmetric real t.
struct OneBodyOperator {
    Eigen::MatrixXd coeff;

    int n_spin_orbitals() const { return static_cast<int>(coeff.rows()); }
    void validate(double tol = 1e-12) const;
};

/// offset + one_body + sum_pqrs g_pqrs E_p^q E_r^s over spin orbitals.
/// When constructed from SpatialTensors the spatial form is kept and used
/// for the faster spin-summed application path.
struct TwoBodyOperator {
    Eigen::MatrixXd one_body;  // may be empty
    FourIndex tensor;          // spin-orbital coefficients
    double offset = 0.0;
    std::optional<SpatialTensors> spatial;

    int n_spin_orbitals() const { return tensor.dim(); }
    static TwoBodyOperator from_spatial(const SpatialTensors& t);
};

// --- low-level applications (no allocation of basis lookups beyond search) ---

/// out += E_p^q semantics are internal; these return op|state> as a fresh
/// vector in the basis of `state`.
Eigen::VectorXd apply_one_body(const OneBodyOperator& op, const ProxyState& state);
Eigen::VectorXd apply_two_body(const TwoBodyOperator& op, const ProxyState& state);

/// Generic coefficient-matrix application (t need not be symmetric).
void apply_one_body_matrix(const Eigen::MatrixXd& t, const SectorBasis& basis,
                           const double* in, double* out);

/// Spin-summed chemist-notation application of (h~, g~); excludes e_nuc.
void apply_spatial_hamiltonian(const SpatialTensors& t, const SectorBasis& basis,
                               const double* in, double* out);

// --- ground states ---

struct LanczosOptions {
    double tol = 1e-10;
    int krylov_dim = 80;
    int max_restarts = 200;
};

/// HF: Aufbau determinant of the parsed orbital ordering. CISD: lowest
/// eigenvector of the Hamiltonian projected on the singles+doubles space
/// around HF. FCI: lowest eigenvector of the full sector. Energy is the
/// Rayleigh quotient; the global sign makes the HF overlap positive.
ProxyState ground_state(const TwoBodyOperator& op, std::shared_ptr<const SectorBasis> basis,
                        ProxyKind kind, const LanczosOptions& opts = {});

// --- expectations and covariances ---

double expectation(const OneBodyOperator& op, const ProxyState& state);
double expectation(const TwoBodyOperator& op, const ProxyState& state);

/// Cov(a,b) = <a s|b s> - <a><b>, real symmetric operators.
double covariance(const OneBodyOperator& a, const OneBodyOperator& b, const ProxyState& s);
double covariance(const TwoBodyOperator& a, const TwoBodyOperator& b, const ProxyState& s);
double covariance(const TwoBodyOperator& a, const OneBodyOperator& b, const ProxyState& s);

/// Symmetrized covariance Cov(a,b) + Cov(b,a).
template <class A, class B>
double covariance_sym(const A& a, const B& b, const ProxyState& s) {
    return 2.0 * covariance(a, b, s);
}

/// Covariance given precomputed applied vectors.
double covariance_applied(const Eigen::VectorXd& va, const Eigen::VectorXd& vb,
                          const ProxyState& s);

// --- orbital rotations ---

/// Real antisymmetric K with exp(K) = u for special-orthogonal u.
/// Throws ValidationError when det(u) = -1.
Eigen::MatrixXd orthogonal_log(const Eigen::MatrixXd& u);

/// exp(sum_{p>q} K_pq (E_p^q - E_q^p)) |state> with K = orthogonal_log(u).
ProxyState rotate_state(const Eigen::MatrixXd& u, const ProxyState& state);

}  // namespace fluidfrag

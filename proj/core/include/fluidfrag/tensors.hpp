#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fluidfrag/error.hpp"

namespace fluidfrag {

/// Dense four-index tensor with a single mode count per axis.
class FourIndex {
   public:
    FourIndex() = default;
    explicit FourIndex(int n) : n_(n), data_(static_cast<size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }

    double& operator()(int i, int j, int k, int l) { return data_[flat(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return data_[flat(i, j, k, l)]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double l1_norm() const;
    double max_abs() const;

    FourIndex& operator*=(double s);
    FourIndex& operator-=(const FourIndex& other);
    FourIndex& operator+=(const FourIndex& other);

    /// Largest deviation from the 8-fold index symmetry
    /// ij<->ji, kl<->lk, (ij)<->(kl).
    double symmetry_residual() const;

    size_t flat(int i, int j, int k, int l) const {
        return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }

   private:
    int n_ = 0;
    std::vector<double> data_;
};

/// Integrals exactly as read from an FCIDUMP file: core one-electron matrix,
/// (ij|kl) two-electron tensor, nuclear repulsion. All in Hartree.
struct RawIntegrals {
    int n_orbitals = 0;
    int n_electrons = 0;
    Eigen::MatrixXd core_h;
    FourIndex eri;
    double e_nuc = 0.0;
    /// Largest disagreement among duplicate entries seen while parsing.
    double duplicate_residual = 0.0;

    void validate(double tol = 1e-12) const;
};

/// Chemist-notation tensors of the working Hamiltonian over spatial orbitals:
/// H = sum_sigma h~_ij E_{i sigma}^{j sigma}
///   + sum_{sigma sigma'} g~_ijkl E_{i sigma}^{j sigma} E_{k sigma'}^{l sigma'}.
struct SpatialTensors {
    Eigen::MatrixXd h_tilde;
    FourIndex g_tilde;
    double e_nuc = 0.0;
    int n_electrons = 0;

    int n_orbitals() const { return static_cast<int>(h_tilde.rows()); }
    int n_spin_orbitals() const { return 2 * n_orbitals(); }
    void validate(double tol = 1e-12) const;
};

/// Spin-orbital expansion of SpatialTensors with interleaved ordering
/// (alpha, beta, alpha, beta, ...): spatial orbital i maps to 2i and 2i+1.
struct SpinTensors {
    Eigen::MatrixXd h;
    FourIndex g;

    int n_spin_orbitals() const { return static_cast<int>(h.rows()); }
    static SpinTensors from_spatial(const SpatialTensors& t);
};

/// g~ = eri/2 and h~_ij = core_h_ij - sum_k g~_ikkj.
SpatialTensors to_chemist(const RawIntegrals& raw);

/// Same-spin block expansion used for rotations and one-body coefficient
/// matrices: M_{2i+s,2j+s} = M~_ij, cross-spin entries zero.
Eigen::MatrixXd spin_expand_one_body(const Eigen::MatrixXd& m_tilde);

/// Coefficient expansion for n_p n_q polynomials: all four spin slots of a
/// spatial pair carry the same value.
Eigen::MatrixXd spin_expand_lambda(const Eigen::MatrixXd& lambda_tilde);

/// Interleaved expansion of a per-spatial-orbital diagonal.
Eigen::VectorXd spin_expand_diagonal(const Eigen::VectorXd& d_tilde);

/// Expand a fragment's (lambda~, U~) pair to spin orbitals.
/// Throws ValidationError when u_tilde is not orthogonal to 1e-10.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spin_expand_fragment(
    const Eigen::MatrixXd& lambda_tilde, const Eigen::MatrixXd& u_tilde);

double orthogonality_residual(const Eigen::MatrixXd& u);
double symmetry_residual(const Eigen::MatrixXd& m);

}  // namespace fluidfrag

#include "fluidfrag/tensors.hpp"

#include <cmath>
#include <cstdlib>

namespace fluidfrag {

double FourIndex::l1_norm() const {
    double s = 0.0;
    for (double v : data_) s += std::abs(v);
    return s;
}

double FourIndex::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

FourIndex& FourIndex::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

FourIndex& FourIndex::operator-=(const FourIndex& other) {
    if (other.n_ != n_) throw DimensionError("FourIndex: dimension mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

FourIndex& FourIndex::operator+=(const FourIndex& other) {
    if (other.n_ != n_) throw DimensionError("FourIndex: dimension mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

double FourIndex::symmetry_residual() const {
    double r = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l) {
                    const double v = (*this)(i, j, k, l);
                    r = std::max(r, std::abs(v - (*this)(j, i, k, l)));
                    r = std::max(r, std::abs(v - (*this)(i, j, l, k)));
                    r = std::max(r, std::abs(v - (*this)(k, l, i, j)));
                }
    return r;
}

double orthogonality_residual(const Eigen::MatrixXd& u) {
    const auto n = u.rows();
    return (u * u.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

double symmetry_residual(const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void RawIntegrals::validate(double tol) const {
    if (core_h.rows() != n_orbitals || core_h.cols() != n_orbitals || eri.dim() != n_orbitals)
        throw ValidationError("RawIntegrals: tensor dimensions disagree with n_orbitals");
    if (n_electrons < 0 || n_electrons > 2 * n_orbitals)
        throw ValidationError("RawIntegrals: electron count outside [0, 2 N_o]");
    if (symmetry_residual(core_h) > tol)
        throw ValidationError("RawIntegrals: core_h not symmetric");
    if (eri.symmetry_residual() > tol)
        throw ValidationError("RawIntegrals: eri violates 8-fold permutation symmetry");
}

void SpatialTensors::validate(double tol) const {
    if (g_tilde.dim() != n_orbitals())
        throw ValidationError("SpatialTensors: tensor dimensions disagree");
    if (symmetry_residual(h_tilde) > tol)
        throw ValidationError("SpatialTensors: h_tilde not symmetric");
    if (g_tilde.symmetry_residual() > tol)
        throw ValidationError("SpatialTensors: g_tilde violates 8-fold symmetry");
}

SpatialTensors to_chemist(const RawIntegrals& raw) {
    raw.validate();
    const int n = raw.n_orbitals;
    SpatialTensors out;
    out.e_nuc = raw.e_nuc;
    out.n_electrons = raw.n_electrons;
    out.g_tilde = raw.eri;
    out.g_tilde *= 0.5;
    out.h_tilde = raw.core_h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double corr = 0.0;
            for (int k = 0; k < n; ++k) corr += out.g_tilde(i, k, k, j);
            out.h_tilde(i, j) -= corr;
        }
    return out;
}

Eigen::MatrixXd spin_expand_one_body(const Eigen::MatrixXd& m_tilde) {
    const int n = static_cast<int>(m_tilde.rows());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int s = 0; s < 2; ++s) out(2 * i + s, 2 * j + s) = m_tilde(i, j);
    return out;
}

Eigen::MatrixXd spin_expand_lambda(const Eigen::MatrixXd& lambda_tilde) {
    const int n = static_cast<int>(lambda_tilde.rows());
    Eigen::MatrixXd out(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) out(2 * i + s, 2 * j + t) = lambda_tilde(i, j);
    return out;
}

Eigen::VectorXd spin_expand_diagonal(const Eigen::VectorXd& d_tilde) {
    Eigen::VectorXd out(2 * d_tilde.size());
    for (Eigen::Index i = 0; i < d_tilde.size(); ++i) out(2 * i) = out(2 * i + 1) = d_tilde(i);
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spin_expand_fragment(
    const Eigen::MatrixXd& lambda_tilde, const Eigen::MatrixXd& u_tilde) {
    if (lambda_tilde.rows() != u_tilde.rows())
        throw DimensionError("spin_expand_fragment: lambda and u sizes differ");
    if (orthogonality_residual(u_tilde) > 1e-10)
        throw ValidationError("spin_expand_fragment: u_tilde not orthogonal to 1e-10");
    return {spin_expand_lambda(lambda_tilde), spin_expand_one_body(u_tilde)};
}

SpinTensors SpinTensors::from_spatial(const SpatialTensors& t) {
    const int n = t.n_orbitals();
    SpinTensors out;
    out.h = spin_expand_one_body(t.h_tilde);
    out.g = FourIndex(2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double v = t.g_tilde(i, j, k, l);
                    if (v == 0.0) continue;
                    for (int s = 0; s < 2; ++s)
                        for (int ss = 0; ss < 2; ++ss)
                            out.g(2 * i + s, 2 * j + s, 2 * k + ss, 2 * l + ss) = v;
                }
    return out;
}

}  // namespace fluidfrag

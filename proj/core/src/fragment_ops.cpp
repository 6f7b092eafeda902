#include "fluidfrag/fragment_ops.hpp"

#include <cmath>

namespace fluidfrag {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::r1: return "r1";
        case Variant::r2: return "r2";
    }
    return "?";
}

Eigen::MatrixXd fragment_spin_rotation(const Fragment& f) {
    return spin_expand_one_body(f.u_tilde);
}

OneBodyOperator fragment_one_body(const Fragment& f) {
    if (f.kind != FragmentKind::one_electron)
        throw ValidationError("fragment_one_body: needs a one-electron fragment");
    Eigen::VectorXd eps = f.lambda_tilde.diagonal();
    if (f.diag_shift.size() > 0) eps += f.diag_shift;
    const Eigen::MatrixXd t = f.u_tilde.transpose() * eps.asDiagonal() * f.u_tilde;
    return OneBodyOperator{spin_expand_one_body(t)};
}

Eigen::VectorXd fragment_apply(const Fragment& f, const ProxyState& state) {
    const int n_spin = 2 * f.n_orbitals();
    if (n_spin != state.basis->n_spin_orbitals())
        throw DimensionError("fragment_apply: fragment and state mode counts differ");

    if (f.kind == FragmentKind::one_electron) {
        Eigen::VectorXd out = apply_one_body(fragment_one_body(f), state);
        if (f.offset != 0.0) out += f.offset * state.amplitudes;
        return out;
    }

    const Eigen::MatrixXd u = fragment_spin_rotation(f);
    const Eigen::MatrixXd lambda = spin_expand_lambda(f.lambda_tilde);
    const SectorBasis& basis = *state.basis;
    const Eigen::Index dim = state.amplitudes.size();

    // chi_v = (U^dag n_v U)|state>
    std::vector<Eigen::VectorXd> chi(n_spin);
    for (int v = 0; v < n_spin; ++v) {
        const Eigen::MatrixXd a_v = u.row(v).transpose() * u.row(v);
        chi[v] = Eigen::VectorXd::Zero(dim);
        apply_one_body_matrix(a_v, basis, state.amplitudes.data(), chi[v].data());
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd y(dim);
    for (int p = 0; p < n_spin; ++p) {
        y.setZero();
        for (int v = 0; v < n_spin; ++v) {
            const double lam = lambda(p, v);
            if (lam != 0.0) y += lam * chi[v];
        }
        if (y.isZero(0.0)) continue;
        const Eigen::MatrixXd a_p = u.row(p).transpose() * u.row(p);
        apply_one_body_matrix(a_p, basis, y.data(), out.data());
    }
    if (f.has_diag_shift()) {
        const Eigen::MatrixXd t =
            f.u_tilde.transpose() * f.diag_shift.asDiagonal() * f.u_tilde;
        apply_one_body_matrix(spin_expand_one_body(t), basis, state.amplitudes.data(),
                              out.data());
    }
    if (f.offset != 0.0) out += f.offset * state.amplitudes;
    return out;
}

double fragment_expectation(const Fragment& f, const ProxyState& state) {
    return state.amplitudes.dot(fragment_apply(f, state));
}

double fragment_variance(const Fragment& f, const ProxyState& state) {
    const Eigen::VectorXd v = fragment_apply(f, state);
    const double mean = state.amplitudes.dot(v);
    return v.squaredNorm() - mean * mean;
}

int variables_per_fragment(Variant variant, int n_orbitals) {
    return variant == Variant::full ? n_orbitals : 1;
}

OneBodyOperator extracted_operator(const Fragment& f, Variant variant, int index) {
    if (f.kind != FragmentKind::two_electron)
        throw ValidationError("extracted_operator: needs a two-electron fragment");
    const int n = f.n_orbitals();
    Eigen::MatrixXd t;
    switch (variant) {
        case Variant::full: {
            if (index < 0 || index >= n)
                throw DimensionError("extracted_operator: spatial index out of range");
            t = f.u_tilde.row(index).transpose() * f.u_tilde.row(index);
            break;
        }
        case Variant::r1: {
            t = f.u_tilde.transpose() * f.lambda_tilde.diagonal().asDiagonal() * f.u_tilde;
            break;
        }
        case Variant::r2: {
            // spin row sums: sum_q lambda_pq = 2 sum_j lambda~_ij
            const Eigen::VectorXd w = 2.0 * f.lambda_tilde.rowwise().sum();
            t = f.u_tilde.transpose() * w.asDiagonal() * f.u_tilde;
            break;
        }
    }
    return OneBodyOperator{spin_expand_one_body(t)};
}

TwoBodyOperator fragment_to_operator(const Fragment& f) {
    const int n_spin = 2 * f.n_orbitals();
    TwoBodyOperator op;
    op.offset = f.offset;
    op.tensor = FourIndex(n_spin);
    op.one_body = Eigen::MatrixXd::Zero(n_spin, n_spin);
    if (f.kind == FragmentKind::one_electron) {
        op.one_body = fragment_one_body(f).coeff;
        return op;
    }
    const Eigen::MatrixXd u = fragment_spin_rotation(f);
    const Eigen::MatrixXd lambda = spin_expand_lambda(f.lambda_tilde);
    std::vector<Eigen::MatrixXd> outer(n_spin);
    for (int p = 0; p < n_spin; ++p) outer[p] = u.row(p).transpose() * u.row(p);
    for (int p = 0; p < n_spin; ++p)
        for (int q = 0; q < n_spin; ++q) {
            const double lam = lambda(p, q);
            if (lam == 0.0) continue;
            for (int i = 0; i < n_spin; ++i)
                for (int j = 0; j < n_spin; ++j) {
                    const double a = lam * outer[p](i, j);
                    if (a == 0.0) continue;
                    for (int k = 0; k < n_spin; ++k)
                        for (int l = 0; l < n_spin; ++l)
                            op.tensor(i, j, k, l) += a * outer[q](k, l);
                }
        }
    if (f.has_diag_shift()) {
        const Eigen::MatrixXd t =
            f.u_tilde.transpose() * f.diag_shift.asDiagonal() * f.u_tilde;
        op.one_body = spin_expand_one_body(t);
    }
    return op;
}

}  // namespace fluidfrag

#include "fluidfrag/fock_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace fluidfrag {

namespace {

// parity of occupied modes strictly between p and q
inline double hop_sign(uint64_t w, int p, int q) {
    const int a = std::min(p, q), b = std::max(p, q);
    if (b - a <= 1) return 1.0;
    const uint64_t mask = ((uint64_t{1} << b) - 1) & ~((uint64_t{1} << (a + 1)) - 1);
    return (std::popcount(w & mask) & 1) ? -1.0 : 1.0;
}

}  // namespace

// ----------------------------- SectorBasis ---------------------------------

SectorBasis::SectorBasis(int n_modes, int n_electrons, std::vector<uint64_t> words)
    : n_modes_(n_modes), n_electrons_(n_electrons), words_(std::move(words)) {}

SectorBasis SectorBasis::full_sector(int n, int eta) {
    if (n < 1 || n > 62) throw DimensionError("SectorBasis: need 1 <= N <= 62 spin-orbitals");
    if (eta < 0 || eta > n) throw DimensionError("SectorBasis: electron count outside [0, N]");
    std::vector<uint64_t> words;
    if (eta == 0) {
        words.push_back(0);
        return SectorBasis(n, eta, std::move(words));
    }
    uint64_t w = (uint64_t{1} << eta) - 1;
    const uint64_t limit = uint64_t{1} << n;
    while (w < limit) {
        words.push_back(w);
        // Gosper's hack: next integer with the same popcount
        const uint64_t c = w & (~w + 1);
        const uint64_t r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    return SectorBasis(n, eta, std::move(words));
}

SectorBasis SectorBasis::excitation_truncated(int n, int eta, uint64_t reference,
                                              int max_excitation) {
    SectorBasis full = full_sector(n, eta);
    std::vector<uint64_t> words;
    for (uint64_t w : full.words())
        if (std::popcount(w & ~reference) <= max_excitation) words.push_back(w);
    return SectorBasis(n, eta, std::move(words));
}

size_t SectorBasis::index_of(uint64_t w) const {
    auto it = std::lower_bound(words_.begin(), words_.end(), w);
    if (it == words_.end() || *it != w) return npos;
    return static_cast<size_t>(it - words_.begin());
}

const char* to_string(ProxyKind k) {
    switch (k) {
        case ProxyKind::HF: return "hf";
        case ProxyKind::CISD: return "cisd";
        case ProxyKind::FCI: return "fci";
    }
    return "?";
}

void ProxyState::validate() const {
    if (!basis) throw ValidationError("ProxyState: missing basis");
    if (static_cast<size_t>(amplitudes.size()) != basis->size())
        throw DimensionError("ProxyState: amplitude length disagrees with basis size");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
        throw ValidationError("ProxyState: not normalized to 1e-10");
}

void OneBodyOperator::validate(double tol) const {
    if (coeff.rows() != coeff.cols()) throw ValidationError("OneBodyOperator: non-square");
    if (symmetry_residual(coeff) > tol)
        throw ValidationError("OneBodyOperator: coefficient matrix not symmetric");
}

TwoBodyOperator TwoBodyOperator::from_spatial(const SpatialTensors& t) {
    t.validate();
    SpinTensors spin = SpinTensors::from_spatial(t);
    TwoBodyOperator op;
    op.one_body = std::move(spin.h);
    op.tensor = std::move(spin.g);
    op.offset = 0.0;  // e_nuc is reporting-level, never part of the operator
    op.spatial = t;
    return op;
}

// ------------------------------ applications -------------------------------

void apply_one_body_matrix(const Eigen::MatrixXd& t, const SectorBasis& basis,
                           const double* in, double* out) {
    const int n = basis.n_spin_orbitals();
    const size_t dim = basis.size();
    for (size_t idx = 0; idx < dim; ++idx) {
        const double amp = in[idx];
        if (amp == 0.0) continue;
        const uint64_t w = basis.word(idx);
        for (int q = 0; q < n; ++q) {
            if (!((w >> q) & 1)) continue;
            out[idx] += t(q, q) * amp;
            for (int p = 0; p < n; ++p) {
                if (p == q || ((w >> p) & 1)) continue;
                const double v = t(p, q);
                if (v == 0.0) continue;
                const uint64_t w2 = (w ^ (uint64_t{1} << q)) | (uint64_t{1} << p);
                const size_t tgt = basis.index_of(w2);
                if (tgt == SectorBasis::npos) continue;
                out[tgt] += v * hop_sign(w, p, q) * amp;
            }
        }
    }
}

namespace {

// E_r^s on word w; returns false when annihilated empty или created occupied.
inline bool excite(uint64_t w, int r, int s, uint64_t& w2, double& sign) {
    if (!((w >> s) & 1)) return false;
    if (r == s) {
        w2 = w;
        sign = 1.0;
        return true;
    }
    if ((w >> r) & 1) return false;
    w2 = (w ^ (uint64_t{1} << s)) | (uint64_t{1} << r);
    sign = hop_sign(w, r, s);
    return true;
}

void apply_spin_tensor(const FourIndex& g, const SectorBasis& basis, const double* in,
                       double* out) {
    const int n = basis.n_spin_orbitals();
    const size_t dim = basis.size();
    for (size_t idx = 0; idx < dim; ++idx) {
        const double amp = in[idx];
        if (amp == 0.0) continue;
        const uint64_t w = basis.word(idx);
        for (int s = 0; s < n; ++s) {
            if (!((w >> s) & 1)) continue;
            for (int r = 0; r < n; ++r) {
                uint64_t w1;
                double sign1;
                if (!excite(w, r, s, w1, sign1)) continue;
                for (int q = 0; q < n; ++q) {
                    if (!((w1 >> q) & 1)) continue;
                    for (int p = 0; p < n; ++p) {
                        const double v = g(p, q, r, s);
                        if (v == 0.0) continue;
                        uint64_t w2;
                        double sign2;
                        if (!excite(w1, p, q, w2, sign2)) continue;
                        const size_t tgt = basis.index_of(w2);
                        if (tgt == SectorBasis::npos) continue;
                        out[tgt] += v * sign1 * sign2 * amp;
                    }
                }
            }
        }
    }
}

}  // namespace

void apply_spatial_hamiltonian(const SpatialTensors& t, const SectorBasis& basis,
                               const double* in, double* out) {
    const int n_o = t.n_orbitals();
    if (2 * n_o != basis.n_spin_orbitals())
        throw DimensionError("apply_spatial_hamiltonian: orbital count mismatch");
    const size_t dim = basis.size();
    const auto& g = t.g_tilde;
    for (size_t idx = 0; idx < dim; ++idx) {
        const double amp = in[idx];
        if (amp == 0.0) continue;
        const uint64_t w = basis.word(idx);
        // one-electron part
        for (int qq = 0; qq < 2 * n_o; ++qq) {
            if (!((w >> qq) & 1)) continue;
            const int j = qq / 2, spin = qq % 2;
            for (int i = 0; i < n_o; ++i) {
                const double v = t.h_tilde(i, j);
                if (v == 0.0) continue;
                uint64_t w2;
                double sign;
                if (!excite(w, 2 * i + spin, qq, w2, sign)) continue;
                const size_t tgt = basis.index_of(w2);
                if (tgt == SectorBasis::npos) continue;
                out[tgt] += v * sign * amp;
            }
        }
        // two-electron part
        for (int ss = 0; ss < 2 * n_o; ++ss) {
            if (!((w >> ss) & 1)) continue;
            const int l = ss / 2, spin1 = ss % 2;
            for (int k = 0; k < n_o; ++k) {
                uint64_t w1;
                double sign1;
                if (!excite(w, 2 * k + spin1, ss, w1, sign1)) continue;
                for (int qq = 0; qq < 2 * n_o; ++qq) {
                    if (!((w1 >> qq) & 1)) continue;
                    const int j = qq / 2, spin2 = qq % 2;
                    for (int i = 0; i < n_o; ++i) {
                        const double v = g(i, j, k, l);
                        if (v == 0.0) continue;
                        uint64_t w2;
                        double sign2;
                        if (!excite(w1, 2 * i + spin2, qq, w2, sign2)) continue;
                        const size_t tgt = basis.index_of(w2);
                        if (tgt == SectorBasis::npos) continue;
                        out[tgt] += v * sign1 * sign2 * amp;
                    }
                }
            }
        }
    }
}

Eigen::VectorXd apply_one_body(const OneBodyOperator& op, const ProxyState& state) {
    if (op.n_spin_orbitals() != state.basis->n_spin_orbitals())
        throw DimensionError("apply_one_body: operator and state mode counts differ");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(state.amplitudes.size());
    apply_one_body_matrix(op.coeff, *state.basis, state.amplitudes.data(), out.data());
    return out;
}

Eigen::VectorXd apply_two_body(const TwoBodyOperator& op, const ProxyState& state) {
    if (op.n_spin_orbitals() != state.basis->n_spin_orbitals())
        throw DimensionError("apply_two_body: operator and state mode counts differ");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(state.amplitudes.size());
    if (op.spatial) {
        apply_spatial_hamiltonian(*op.spatial, *state.basis, state.amplitudes.data(),
                                  out.data());
    } else {
        apply_spin_tensor(op.tensor, *state.basis, state.amplitudes.data(), out.data());
        if (op.one_body.size() > 0)
            apply_one_body_matrix(op.one_body, *state.basis, state.amplitudes.data(),
                                  out.data());
    }
    if (op.offset != 0.0) out += op.offset * state.amplitudes;
    return out;
}

// ------------------------------ ground states ------------------------------

namespace {

using ApplyFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LanczosOut {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    int iterations = 0;
};

// Lanczos with full reorthogonalization, restarted from the best Ritz vector.
// Deterministic given the start vector. `prefer_index`: among Ritz values
// within 1e-10 of the minimum, the vector with the largest weight on this
// coordinate wins (degenerate ground states are resolved toward HF).
LanczosOut lanczos_lowest(const ApplyFn& apply, const Eigen::VectorXd& start,
                          size_t prefer_index, const LanczosOptions& opts) {
    const Eigen::Index dim = start.size();
    Eigen::VectorXd v = start.normalized();
    LanczosOut out;
    int total_iters = 0;

    for (int restart = 0; restart < opts.max_restarts; ++restart) {
        const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, dim));
        std::vector<Eigen::VectorXd> basis;
        basis.reserve(m_max);
        std::vector<double> alpha, beta;
        basis.push_back(v);
        Eigen::VectorXd w(dim);
        for (int k = 0; k < m_max; ++k) {
            w.setZero();
            apply(basis[k], w);
            ++total_iters;
            const double a = basis[k].dot(w);
            alpha.push_back(a);
            w -= a * basis[k];
            if (k > 0) w -= beta[k - 1] * basis[k - 1];
            for (const auto& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
            for (const auto& b : basis) w -= b.dot(w) * b;
            const double bnorm = w.norm();
            if (k + 1 == m_max || bnorm < 1e-14) break;
            beta.push_back(bnorm);
            basis.push_back(w / bnorm);
        }
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
            T(k, k) = alpha[k];
            if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const double theta = es.eigenvalues()(0);

        // assemble the winning Ritz vector, breaking exact degeneracies
        int pick = 0;
        double best_overlap = -1.0;
        for (int c = 0; c < m && es.eigenvalues()(c) < theta + 1e-10; ++c) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
            for (int k = 0; k < m; ++k) x += es.eigenvectors()(k, c) * basis[k];
            const double overlap = std::abs(x(static_cast<Eigen::Index>(prefer_index)));
            if (overlap > best_overlap) {
                best_overlap = overlap;
                pick = c;
            }
        }
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        for (int k = 0; k < m; ++k) x += es.eigenvectors()(k, pick) * basis[k];
        x.normalize();

        w.setZero();
        apply(x, w);
        const double value = x.dot(w);
        const double residual = (w - value * x).norm();
        out.value = value;
        out.vector = x;
        out.residual = residual;
        out.iterations = total_iters;
        if (residual <= opts.tol * (1.0 + std::abs(value))) return out;
        v = x;
    }
    throw ConvergenceError("lanczos: residual " + std::to_string(out.residual) +
                               " above tolerance after max restarts",
                           out.residual);
}

uint64_t aufbau_word(int n_electrons) {
    return (uint64_t{1} << n_electrons) - 1;
}

}  // namespace

ProxyState ground_state(const TwoBodyOperator& op, std::shared_ptr<const SectorBasis> basis,
                        ProxyKind kind, const LanczosOptions& opts) {
    if (op.n_spin_orbitals() != basis->n_spin_orbitals())
        throw DimensionError("ground_state: operator and basis mode counts differ");
    const uint64_t hf = aufbau_word(basis->n_electrons());
    const size_t hf_idx = basis->index_of(hf);
    if (hf_idx == SectorBasis::npos)
        throw ValidationError("ground_state: Aufbau determinant not in basis");

    ProxyState state;
    state.basis = basis;
    state.kind = kind;

    if (kind == ProxyKind::HF) {
        state.amplitudes = Eigen::VectorXd::Zero(basis->size());
        state.amplitudes(hf_idx) = 1.0;
        state.energy = state.amplitudes.dot(apply_two_body(op, state));
        return state;
    }

    // CISD works on the truncated basis, then embeds into the full sector.
    std::shared_ptr<const SectorBasis> work = basis;
    size_t work_hf = hf_idx;
    if (kind == ProxyKind::CISD) {
        work = std::make_shared<SectorBasis>(SectorBasis::excitation_truncated(
            basis->n_spin_orbitals(), basis->n_electrons(), hf, 2));
        work_hf = work->index_of(hf);
    }

    ApplyFn apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        if (op.spatial) {
            apply_spatial_hamiltonian(*op.spatial, *work, in.data(), out.data());
        } else {
            apply_spin_tensor(op.tensor, *work, in.data(), out.data());
            if (op.one_body.size() > 0)
                apply_one_body_matrix(op.one_body, *work, in.data(), out.data());
        }
        if (op.offset != 0.0) out += op.offset * in;
    };

    Eigen::VectorXd start = Eigen::VectorXd::Zero(work->size());
    start(work_hf) = 1.0;
    LanczosOut sol = lanczos_lowest(apply, start, work_hf, opts);

    Eigen::VectorXd amps;
    if (kind == ProxyKind::CISD) {
        amps = Eigen::VectorXd::Zero(basis->size());
        for (size_t i = 0; i < work->size(); ++i)
            amps(basis->index_of(work->word(i))) = sol.vector(i);
    } else {
        amps = sol.vector;
    }

    // reproducible global sign
    if (std::abs(amps(hf_idx)) > 1e-12) {
        if (amps(hf_idx) < 0) amps = -amps;
    } else {
        Eigen::Index imax;
        amps.cwiseAbs().maxCoeff(&imax);
        if (amps(imax) < 0) amps = -amps;
    }

    state.amplitudes = std::move(amps);
    state.energy = sol.value;
    return state;
}

// ------------------------- expectations, covariances -----------------------

double expectation(const OneBodyOperator& op, const ProxyState& state) {
    return state.amplitudes.dot(apply_one_body(op, state));
}

double expectation(const TwoBodyOperator& op, const ProxyState& state) {
    return state.amplitudes.dot(apply_two_body(op, state));
}

double covariance_applied(const Eigen::VectorXd& va, const Eigen::VectorXd& vb,
                          const ProxyState& s) {
    return va.dot(vb) - s.amplitudes.dot(va) * s.amplitudes.dot(vb);
}

double covariance(const OneBodyOperator& a, const OneBodyOperator& b, const ProxyState& s) {
    return covariance_applied(apply_one_body(a, s), apply_one_body(b, s), s);
}

double covariance(const TwoBodyOperator& a, const TwoBodyOperator& b, const ProxyState& s) {
    return covariance_applied(apply_two_body(a, s), apply_two_body(b, s), s);
}

double covariance(const TwoBodyOperator& a, const OneBodyOperator& b, const ProxyState& s) {
    return covariance_applied(apply_two_body(a, s), apply_one_body(b, s), s);
}

// ------------------------------ rotations ----------------------------------

Eigen::MatrixXd orthogonal_log(const Eigen::MatrixXd& u) {
    const Eigen::Index n = u.rows();
    if (u.cols() != n) throw ValidationError("orthogonal_log: non-square input");
    if (orthogonality_residual(u) > 1e-10)
        throw ValidationError("orthogonal_log: input not orthogonal to 1e-10");
    if (u.determinant() < 0)
        throw ValidationError(
            "orthogonal_log: determinant -1, no real logarithm on the principal branch");

    Eigen::RealSchur<Eigen::MatrixXd> schur(u);
    const Eigen::MatrixXd& T = schur.matrixT();
    const Eigen::MatrixXd& Q = schur.matrixU();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> minus_ones;
    Eigen::Index i = 0;
    while (i < n) {
        if (i + 1 < n && std::abs(T(i + 1, i)) > 1e-12) {
            const double t = std::atan2(T(i + 1, i), T(i, i));
            K(i, i + 1) = -t;
            K(i + 1, i) = t;
            i += 2;
        } else {
            const double val = T(i, i);
            if (std::abs(std::abs(val) - 1.0) > 1e-8)
                throw ValidationError("orthogonal_log: Schur value off the unit circle");
            if (val < 0) minus_ones.push_back(i);
            ++i;
        }
    }
    if (minus_ones.size() % 2 != 0)
        throw ValidationError("orthogonal_log: odd count of -1 eigenvalues (det -1)");
    for (size_t k = 0; k + 1 < minus_ones.size(); k += 2) {
        const auto a = minus_ones[k], b = minus_ones[k + 1];
        K(a, b) = -M_PI;
        K(b, a) = M_PI;
    }
    Eigen::MatrixXd out = Q * K * Q.transpose();
    return 0.5 * (out - out.transpose());
}

ProxyState rotate_state(const Eigen::MatrixXd& u, const ProxyState& state) {
    if (u.rows() != state.basis->n_spin_orbitals())
        throw DimensionError("rotate_state: rotation and state mode counts differ");
    const Eigen::MatrixXd K = orthogonal_log(u);
    const SectorBasis& basis = *state.basis;

    // scaling and squaring on the sector: |K_hat| <= eta * |K|_F
    const double bound = basis.n_electrons() * K.norm();
    int s = 0;
    while ((bound / (uint64_t{1} << s)) > 0.5 && s < 60) ++s;
    const Eigen::MatrixXd Ks = K / static_cast<double>(uint64_t{1} << s);

    Eigen::VectorXd v = state.amplitudes;
    Eigen::VectorXd term(v.size()), next(v.size());
    for (uint64_t rep = 0; rep < (uint64_t{1} << s); ++rep) {
        term = v;
        Eigen::VectorXd acc = v;
        for (int k = 1; k <= 40; ++k) {
            next.setZero();
            apply_one_body_matrix(Ks, basis, term.data(), next.data());
            term = next / static_cast<double>(k);
            acc += term;
            if (term.norm() <= 1e-16 * acc.norm()) break;
        }
        v = acc;
    }

    ProxyState out;
    out.basis = state.basis;
    out.amplitudes = std::move(v);
    out.kind = state.kind;
    out.energy = std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace fluidfrag

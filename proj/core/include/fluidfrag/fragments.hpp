#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluidfrag/tensors.hpp"

namespace fluidfrag {

enum class FragmentKind { one_electron, two_electron };
enum class FragmentSource { LR, GFRO };

/// One measurable Hamiltonian piece over spatial orbitals.
///
/// one_electron:  U~^T (sum_{i sigma} lambda~_ii n_{i sigma}) U~ + offset
/// two_electron:  U~^T (sum_{ij sigma sigma'} lambda~_ij n_{i sigma} n_{j sigma'}
///                      + sum_{i sigma} diag_shift_i n_{i sigma}) U~ + offset
///
/// diag_shift carries the one-electron weight moved out of the fragment by a
/// repartition; it is zero for freshly decomposed sets.
struct Fragment {
    FragmentKind kind = FragmentKind::two_electron;
    Eigen::MatrixXd u_tilde;       // rows are the rotated-frame orbitals
    Eigen::MatrixXd lambda_tilde;  // symmetric; diagonal matrix for one_electron
    Eigen::VectorXd diag_shift;    // spatial, zero when absent
    double offset = 0.0;
    std::optional<Eigen::VectorXd> rank1_factor;

    int n_orbitals() const { return static_cast<int>(u_tilde.rows()); }
    bool has_diag_shift() const;
    void validate() const;
};

struct FragmentSet {
    Fragment h0;                     // one_electron
    std::vector<Fragment> two_body;  // ordered
    FragmentSource source = FragmentSource::LR;
    double residual_l1 = 0.0;

    int n_orbitals() const { return h0.n_orbitals(); }
    int n_fragments() const { return static_cast<int>(two_body.size()); }
    void validate() const;
};

/// Eigendecompose a symmetric one-electron matrix into a measurable fragment:
/// ascending eigenvalues, each eigenvector's largest-magnitude entry positive.
Fragment diagonalize_one_electron(const Eigen::MatrixXd& h_tilde);

/// Low-rank decomposition: eigendecompose the (ij),(kl) matricization of g~,
/// keep |eigenvalue| > threshold, diagonalize each eigenmatrix. Fragments are
/// ordered by descending |eigenvalue|; rank1_factor records eta~ with
/// lambda~ = eta~ eta~^T for non-negative eigenvalues.
FragmentSet lr_decompose(const SpatialTensors& t, double truncation_threshold = 1e-8);

struct GfroConfig {
    enum class Cost { frobenius, l1_smoothed };
    Cost cost = Cost::frobenius;
    int max_fragments = 0;       // 0: 8 * N_o^2
    int random_restarts = 5;     // per fragment, on top of the zero start
    uint64_t seed = 1;
    double restart_amplitude = 0.3;
    int bfgs_max_iter = 400;
    /// called after each accepted fragment with (index, residual L1)
    std::function<void(int, double)> on_iteration;
};

/// Greedy full-rank optimization: repeatedly fit one fragment to the residual
/// two-electron tensor and subtract it, until the residual L1 norm drops
/// below `termination_threshold`.
FragmentSet gfro_decompose(const SpatialTensors& t, double termination_threshold = 1e-5,
                           const GfroConfig& config = {});

/// Tensor of one fragment: G_fit[ijkl] = sum_pq lambda~_pq u_pi u_pj u_qk u_ql.
FourIndex fragment_tensor(const Fragment& f);

struct Reconstruction {
    Eigen::MatrixXd h_tilde;
    FourIndex g_tilde;
    double offset = 0.0;
};

/// Tensors of the operator sum of the set (diag shifts fold into h_tilde).
Reconstruction reconstruct(const FragmentSet& set);

// --- serialization (JSON document) ---

void write_fragments(std::ostream& out, const FragmentSet& set);
void write_fragments_file(const std::string& path, const FragmentSet& set);
FragmentSet read_fragments(std::istream& in);
FragmentSet read_fragments_file(const std::string& path);

const char* to_string(FragmentSource s);

}  // namespace fluidfrag

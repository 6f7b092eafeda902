#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "fluidfrag/fock_space.hpp"
#include "fluidfrag/fragment_ops.hpp"
#include "fluidfrag/fragments.hpp"

namespace fluidfrag {

/// Proxy covariances feeding the repartition linear systems. All covariance
/// entries are symmetrized (Cov(a,b) + Cov(b,a)).
struct CovarianceCache {
    Variant variant = Variant::full;
    int n_fragments = 0;        // N_f
    int n_orbitals = 0;
    Eigen::VectorXd var_frag;   // length N_f+1, [0] is the one-electron fragment
    Eigen::MatrixXd cov_oo;     // N_c x N_c
    Eigen::VectorXd cov_h0_o;   // N_c
    Eigen::VectorXd cov_own_o;  // N_c, against the owning fragment
    std::vector<int> frag_of;   // N_c -> owning two-body fragment (0-based)
    std::vector<int> frag_offset;  // per fragment, start of its c-slice

    int n_variables() const { return static_cast<int>(frag_of.size()); }
    void validate() const;
};

CovarianceCache build_cache(const FragmentSet& set, const ProxyState& proxy, Variant variant);

/// Repartitioned fragment variances as quadratic forms in c.
Eigen::VectorXd variances_from_cache(const CovarianceCache& cache, const Eigen::VectorXd& c);

/// sum_alpha Var'_alpha / m_alpha (the epsilon^2 M objective).
double objective(const CovarianceCache& cache, const Eigen::VectorXd& c,
                 const Eigen::VectorXd& m);

struct SolveInfo {
    Eigen::VectorXd c;
    bool rank_deficient = false;
    double residual = 0.0;  // of the stationarity equations
};

/// Minimize the objective over c at fixed m: symmetric PSD system solved by
/// eigenvalue-thresholded pseudoinverse; null directions get zero coefficient.
SolveInfo solve_c(const CovarianceCache& cache, const Eigen::VectorXd& m);

/// Optimal measurement allocation m_alpha ~ sqrt(Var_alpha), floored at 1e-12
/// and renormalized. All-zero variances give the uniform allocation.
Eigen::VectorXd allocate(const Eigen::VectorXd& variances);

struct RepartitionSolution {
    Variant variant = Variant::full;
    ProxyKind proxy = ProxyKind::CISD;
    Eigen::VectorXd c;  // length N_c
    Eigen::VectorXd m;  // length N_f+1
    double predicted_eps2M = 0.0;
    int iterations = 0;
    bool converged = false;
    bool rank_deficient = false;
    double stationarity_residual = 0.0;  // |A c - b| of the final c-solve
};

/// Alternate solve_c (fixed m) and allocate (fixed c) from c=0 until the
/// relative objective change drops below tol. The objective is non-increasing
/// across every half-step.
RepartitionSolution iterate(const FragmentSet& set, const ProxyState& proxy, Variant variant,
                            double tol = 1e-6, int max_iter = 50);

/// Move the extracted one-electron weight: each two-body fragment's rotated
/// diagonal drops c, the accumulated one-body matrix joins h0 (re-diagonalized).
/// The operator sum is unchanged. c = 0 returns the set bit-for-bit.
FragmentSet apply_repartition(const FragmentSet& set, const Eigen::VectorXd& c,
                              Variant variant);

/// Per-fragment spatial extraction coefficients implied by (c, variant).
std::vector<Eigen::VectorXd> expand_coefficients(const FragmentSet& set,
                                                 const Eigen::VectorXd& c, Variant variant);

// --- solution file (JSON document) ---

void write_solution(std::ostream& out, const RepartitionSolution& s);
void write_solution_file(const std::string& path, const RepartitionSolution& s);
RepartitionSolution read_solution(std::istream& in);
RepartitionSolution read_solution_file(const std::string& path);

}  // namespace fluidfrag

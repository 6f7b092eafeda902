#pragma once

// Fragments acting on sector states. All operators are evaluated in the
// original orbital frame by conjugating coefficients with the fragment
// rotation (U^dag n_p U has the one-body matrix u_p u_p^T built from row p),
// so no operator exponentials enter the covariance path.

#include <Eigen/Dense>

#include "fluidfrag/fock_space.hpp"
#include "fluidfrag/fragments.hpp"

namespace fluidfrag {

enum class Variant { full, r1, r2 };
const char* to_string(Variant v);

/// Spin-orbital rotation matrix of a fragment (always determinant +1).
Eigen::MatrixXd fragment_spin_rotation(const Fragment& f);

/// Spin-orbital coefficient matrix of a one-electron fragment
/// (eigen-diagonal plus any diag_shift), conjugated to the original frame.
OneBodyOperator fragment_one_body(const Fragment& f);

/// Fragment |state>, offset included. Two-electron fragments are applied as
/// nested one-body actions of the conjugated number operators.
Eigen::VectorXd fragment_apply(const Fragment& f, const ProxyState& state);

double fragment_expectation(const Fragment& f, const ProxyState& state);
double fragment_variance(const Fragment& f, const ProxyState& state);

/// The one-body operator whose coefficient is extracted from a two-electron
/// fragment by the given variant:
///   full: spin pair  P_i = sum_sigma U^dag n_{i sigma} U          (i in [0, N_o))
///   r1:   O = sum_p lambda_pp U^dag n_p U                         (index ignored)
///   r2:   O = sum_pq lambda_pq U^dag n_p U                        (index ignored)
OneBodyOperator extracted_operator(const Fragment& f, Variant variant, int index = 0);

/// Number of extracted operators per fragment for a variant.
int variables_per_fragment(Variant variant, int n_orbitals);

/// Dense spin-orbital operator of a fragment (tests and cross-checks).
TwoBodyOperator fragment_to_operator(const Fragment& f);

}  // namespace fluidfrag

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluidfrag/fluid.hpp"

namespace fluidfrag {

struct FragmentMetric {
    double variance = 0.0;
    double m = 0.0;
    double contribution = 0.0;  // variance / m
};

struct MeasurementReport {
    std::vector<FragmentMetric> per_fragment;  // index 0: one-electron fragment
    double eps2M = 0.0;
    double eps2M_opt = 0.0;
    // proxy-optimized prediction and its gap to the exact value, when known
    std::optional<double> predicted_eps2M;
    std::optional<double> proxy_gap;
    ProxyKind psi_kind = ProxyKind::FCI;
    std::optional<Variant> variant;
    std::string molecule;
    std::string notes;  // e.g. allocation convention, frozen-core choice
};

/// Exact measurement cost of a fragment set under allocation m with the
/// reference state psi: eps2M = sum Var_psi(H_alpha)/m_alpha and the
/// allocation-optimal eps2M_opt = (sum sqrt(Var))^2.
MeasurementReport exact_report(const FragmentSet& set, const Eigen::VectorXd& m,
                               const ProxyState& psi);

/// L1 norm of the reflection-form LCU of a two-electron fragment (identity
/// excluded); upper-bounds sqrt(Var_psi) for every psi and DeltaE/2.
double lcu_l1_bound(const Fragment& f);

struct ShotRun {
    uint64_t seed = 0;
    long total_shots = 0;
    std::vector<long> shots;            // per fragment
    double estimate = 0.0;              // sum of fragment sample means
    double reference = 0.0;             // <psi|sum H_alpha|psi>
    std::vector<double> sample_variance;
    std::vector<std::string> warnings;
};

/// Seeded shot-noise simulation: rotate psi into each fragment's frame,
/// sample occupation words, evaluate the diagonal polynomial per shot.
/// Fragment shot counts are round(M m_alpha) with largest-remainder
/// correction; every fragment receives at least one shot.
ShotRun simulate_shots(const FragmentSet& set, const Eigen::VectorXd& m, long total_shots,
                       const ProxyState& psi, uint64_t seed);

void write_report_tsv(std::ostream& out, const MeasurementReport& report);

}  // namespace fluidfrag

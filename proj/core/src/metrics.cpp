#include "fluidfrag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "fluidfrag/rng.hpp"

namespace fluidfrag {

MeasurementReport exact_report(const FragmentSet& set, const Eigen::VectorXd& m,
                               const ProxyState& psi) {
    psi.validate();
    if (2 * set.n_orbitals() != psi.basis->n_spin_orbitals())
        throw DimensionError("exact_report: fragment set and reference sector differ");
    const int n_f = set.n_fragments();
    if (m.size() != n_f + 1) throw DimensionError("exact_report: allocation of wrong length");
    if (m.minCoeff() <= 0.0 || std::abs(m.sum() - 1.0) > 1e-9)
        throw ValidationError("exact_report: m must be a positive simplex vector");

    MeasurementReport report;
    report.psi_kind = psi.kind;
    report.per_fragment.resize(n_f + 1);
    double sqrt_sum = 0.0;
    for (int a = 0; a <= n_f; ++a) {
        const Fragment& f = a == 0 ? set.h0 : set.two_body[a - 1];
        const double var = std::max(fragment_variance(f, psi), 0.0);
        report.per_fragment[a].variance = var;
        report.per_fragment[a].m = m(a);
        report.per_fragment[a].contribution = var / m(a);
        report.eps2M += var / m(a);
        sqrt_sum += std::sqrt(var);
    }
    report.eps2M_opt = sqrt_sum * sqrt_sum;
    return report;
}

double lcu_l1_bound(const Fragment& f) {
    if (f.kind != FragmentKind::two_electron)
        throw ValidationError("lcu_l1_bound: needs a two-electron fragment");
    const Eigen::MatrixXd lambda = spin_expand_lambda(f.lambda_tilde);
    const int n = static_cast<int>(lambda.rows());
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(n);
    if (f.diag_shift.size() > 0) omega = spin_expand_diagonal(f.diag_shift);

    // n_p = (1 - r_p)/2 turns sum lambda_pq n_p n_q + sum omega_p n_p into
    //   identity + sum_p a_p r_p + sum_{p<q} (lambda_pq/2) r_p r_q,
    //   a_p = -(sum_q lambda_pq + omega_p)/2
    double l1 = 0.0;
    for (int p = 0; p < n; ++p) l1 += 0.5 * std::abs(lambda.row(p).sum() + omega(p));
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (p != q) l1 += 0.25 * std::abs(lambda(p, q));
    return l1;
}

namespace {

// value of the fragment's rotated-frame diagonal polynomial on a word
double diagonal_value(const Fragment& f, uint64_t word, int n_spin) {
    std::vector<int> occ;
    occ.reserve(n_spin);
    for (int p = 0; p < n_spin; ++p)
        if ((word >> p) & 1) occ.push_back(p);
    double v = f.offset;
    if (f.kind == FragmentKind::one_electron) {
        for (int p : occ) v += f.lambda_tilde(p / 2, p / 2);
        if (f.diag_shift.size() > 0)
            for (int p : occ) v += f.diag_shift(p / 2);
        return v;
    }
    for (int p : occ)
        for (int q : occ) v += f.lambda_tilde(p / 2, q / 2);
    if (f.diag_shift.size() > 0)
        for (int p : occ) v += f.diag_shift(p / 2);
    return v;
}

std::vector<long> rounded_counts(const Eigen::VectorXd& m, long total) {
    const int n = static_cast<int>(m.size());
    std::vector<long> counts(n);
    std::vector<double> frac(n);
    long assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double exact = m(i) * static_cast<double>(total);
        counts[i] = static_cast<long>(std::floor(exact));
        frac[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    // largest remainder, ties to the lower index
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; assigned < total && k < n; ++k, ++assigned) ++counts[order[k]];
    for (auto& c : counts) c = std::max(c, 1L);
    return counts;
}

}  // namespace

ShotRun simulate_shots(const FragmentSet& set, const Eigen::VectorXd& m, long total_shots,
                       const ProxyState& psi, uint64_t seed) {
    if (total_shots < 1) throw ValidationError("simulate_shots: need at least one shot");
    psi.validate();
    const int n_f = set.n_fragments();
    if (m.size() != n_f + 1)
        throw DimensionError("simulate_shots: allocation of wrong length");
    const int n_spin = psi.basis->n_spin_orbitals();
    const size_t dim = psi.basis->size();

    ShotRun run;
    run.seed = seed;
    run.total_shots = total_shots;
    run.shots = rounded_counts(m, total_shots);
    run.sample_variance.assign(n_f + 1, 0.0);

    for (int a = 0; a <= n_f; ++a) {
        const Fragment& f = a == 0 ? set.h0 : set.two_body[a - 1];
        const ProxyState rotated = rotate_state(fragment_spin_rotation(f), psi);

        std::vector<double> prob(dim), value(dim);
        double mean_exact = 0.0, second_exact = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            prob[i] = rotated.amplitudes(static_cast<Eigen::Index>(i)) *
                      rotated.amplitudes(static_cast<Eigen::Index>(i));
            value[i] = diagonal_value(f, psi.basis->word(i), n_spin);
            mean_exact += prob[i] * value[i];
            second_exact += prob[i] * value[i] * value[i];
        }
        run.reference += mean_exact;
        const double var_exact = second_exact - mean_exact * mean_exact;
        if (m(a) <= 1e-15 && var_exact > 1e-12)
            run.warnings.push_back("fragment " + std::to_string(a) +
                                   ": zero allocation but nonzero variance");

        std::vector<double> cdf(dim);
        std::partial_sum(prob.begin(), prob.end(), cdf.begin());
        cdf.back() = std::max(cdf.back(), 1.0);

        CounterRng rng(seed, static_cast<uint64_t>(a));
        const long shots = run.shots[a];
        double sum = 0.0, sumsq = 0.0;
        for (long s = 0; s < shots; ++s) {
            const double u = rng.uniform();
            const size_t idx = static_cast<size_t>(
                std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            const double v = value[std::min(idx, dim - 1)];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / static_cast<double>(shots);
        run.estimate += mean;
        run.sample_variance[a] =
            shots > 1 ? (sumsq - shots * mean * mean) / static_cast<double>(shots - 1) : 0.0;
    }
    return run;
}

void write_report_tsv(std::ostream& out, const MeasurementReport& report) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.5e", v);
        return std::string(buf);
    };
    out << "fragment_index\tvariance\tm\tcontribution\n";
    for (size_t i = 0; i < report.per_fragment.size(); ++i) {
        const auto& fm = report.per_fragment[i];
        out << i << "\t" << num(fm.variance) << "\t" << num(fm.m) << "\t"
            << num(fm.contribution) << "\n";
    }
    out << "eps2M\t" << num(report.eps2M) << "\n";
    out << "eps2M_opt\t" << num(report.eps2M_opt) << "\n";
    if (report.predicted_eps2M) out << "predicted_eps2M\t" << num(*report.predicted_eps2M) << "\n";
    if (report.proxy_gap) out << "proxy_gap\t" << num(*report.proxy_gap) << "\n";
    out << "psi\t" << to_string(report.psi_kind) << "\n";
    if (report.variant) out << "variant\t" << to_string(*report.variant) << "\n";
    if (!report.molecule.empty()) out << "molecule\t" << report.molecule << "\n";
    if (!report.notes.empty()) out << "notes\t" << report.notes << "\n";
}

}  // namespace fluidfrag

#include "fluidfrag/fragments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fluidfrag/rng.hpp"
#include "minimize.hpp"

namespace fluidfrag {

namespace {

// largest-magnitude entry of each row made positive (first index wins ties)
void sign_fix_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (std::abs(m(r, c)) > best) {
                best = std::abs(m(r, c));
                imax = c;
            }
        if (m(r, imax) < 0) m.row(r) = -m.row(r);
    }
}

void sign_fix_vector(Eigen::VectorXd& v) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            imax = i;
        }
    if (v(imax) < 0) v = -v;
}

}  // namespace

bool Fragment::has_diag_shift() const {
    return diag_shift.size() > 0 && diag_shift.cwiseAbs().maxCoeff() > 0.0;
}

void Fragment::validate() const {
    const int n = n_orbitals();
    if (lambda_tilde.rows() != n || lambda_tilde.cols() != n)
        throw ValidationError("Fragment: lambda_tilde size disagrees with u_tilde");
    if (diag_shift.size() != 0 && diag_shift.size() != n)
        throw ValidationError("Fragment: diag_shift size disagrees with u_tilde");
    if (orthogonality_residual(u_tilde) > 1e-10)
        throw ValidationError("Fragment: u_tilde not orthogonal to 1e-10");
    if (symmetry_residual(lambda_tilde) > 1e-10)
        throw ValidationError("Fragment: lambda_tilde not symmetric");
    if (kind == FragmentKind::one_electron) {
        Eigen::MatrixXd off = lambda_tilde;
        off.diagonal().setZero();
        if (off.cwiseAbs().maxCoeff() > 0.0)
            throw ValidationError("Fragment: one-electron lambda_tilde must be diagonal");
    }
    if (rank1_factor) {
        if (rank1_factor->size() != n)
            throw ValidationError("Fragment: rank1_factor size disagrees");
        const Eigen::MatrixXd outer = (*rank1_factor) * rank1_factor->transpose();
        if ((lambda_tilde - outer).cwiseAbs().maxCoeff() > 1e-10)
            throw ValidationError("Fragment: rank1_factor does not reproduce lambda_tilde");
    }
}

void FragmentSet::validate() const {
    if (h0.kind != FragmentKind::one_electron)
        throw ValidationError("FragmentSet: h0 must be one_electron");
    h0.validate();
    const int n = n_orbitals();
    for (const auto& f : two_body) {
        if (f.kind != FragmentKind::two_electron)
            throw ValidationError("FragmentSet: two_body entry of wrong kind");
        if (f.n_orbitals() != n) throw ValidationError("FragmentSet: mixed orbital counts");
        f.validate();
    }
    if (source == FragmentSource::LR) {
        const int limit = n * (n + 1) / 2;
        if (n_fragments() > limit)
            throw ValidationError("FragmentSet: LR fragment count above N_o(N_o+1)/2");
    }
}

Fragment diagonalize_one_electron(const Eigen::MatrixXd& h_tilde) {
    if (symmetry_residual(h_tilde) > 1e-10)
        throw ValidationError("diagonalize_one_electron: input not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_tilde);
    Fragment f;
    f.kind = FragmentKind::one_electron;
    f.u_tilde = es.eigenvectors().transpose();
    sign_fix_rows(f.u_tilde);
    f.lambda_tilde = es.eigenvalues().asDiagonal();
    return f;
}

FourIndex fragment_tensor(const Fragment& f) {
    if (f.kind != FragmentKind::two_electron)
        throw ValidationError("fragment_tensor: needs a two-electron fragment");
    const int n = f.n_orbitals();
    FourIndex g(n);
    // sum_pq lambda_pq (u_p u_p^T) x (u_q u_q^T)
    std::vector<Eigen::MatrixXd> outer(n);
    for (int p = 0; p < n; ++p)
        outer[p] = f.u_tilde.row(p).transpose() * f.u_tilde.row(p);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const double lam = f.lambda_tilde(p, q);
            if (lam == 0.0) continue;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double a = lam * outer[p](i, j);
                    if (a == 0.0) continue;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) g(i, j, k, l) += a * outer[q](k, l);
                }
        }
    return g;
}

Reconstruction reconstruct(const FragmentSet& set) {
    const int n = set.n_orbitals();
    Reconstruction out;
    Eigen::VectorXd eps = set.h0.lambda_tilde.diagonal();
    if (set.h0.diag_shift.size() > 0) eps += set.h0.diag_shift;
    out.h_tilde = set.h0.u_tilde.transpose() * eps.asDiagonal() * set.h0.u_tilde;
    out.g_tilde = FourIndex(n);
    out.offset = set.h0.offset;
    for (const auto& f : set.two_body) {
        out.g_tilde += fragment_tensor(f);
        if (f.has_diag_shift())
            out.h_tilde +=
                f.u_tilde.transpose() * f.diag_shift.asDiagonal() * f.u_tilde;
        out.offset += f.offset;
    }
    return out;
}

// --------------------------------- LR --------------------------------------

FragmentSet lr_decompose(const SpatialTensors& t, double truncation_threshold) {
    t.validate();
    const int n = t.n_orbitals();
    const int nn = n * n;

    Eigen::MatrixXd m(nn, nn);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) m(i * n + j, k * n + l) = t.g_tilde(i, j, k, l);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);

    struct Pair {
        double eps;
        Eigen::VectorXd w;
    };
    std::vector<Pair> pairs;
    pairs.reserve(nn);
    for (int a = 0; a < nn; ++a) {
        Eigen::VectorXd w = es.eigenvectors().col(a);
        sign_fix_vector(w);
        pairs.push_back({es.eigenvalues()(a), std::move(w)});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        const double da = std::abs(a.eps), db = std::abs(b.eps);
        if (da != db) return da > db;
        return std::lexicographical_compare(a.w.data(), a.w.data() + a.w.size(), b.w.data(),
                                            b.w.data() + b.w.size());
    });

    const double scale = pairs.empty() ? 0.0 : std::abs(pairs.front().eps);
    const double cut = std::max(truncation_threshold, 1e-13 * scale);

    FragmentSet set;
    set.source = FragmentSource::LR;
    set.h0 = diagonalize_one_electron(t.h_tilde);
    double truncated_bound = 0.0;
    for (const auto& p : pairs) {
        if (std::abs(p.eps) <= cut) {
            truncated_bound += std::abs(p.eps) * std::pow(p.w.lpNorm<1>(), 2);
            continue;
        }
        Eigen::MatrixXd w_mat(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w_mat(i, j) = p.w(i * n + j);
        w_mat = 0.5 * (w_mat + w_mat.transpose());

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(w_mat);
        Fragment f;
        f.kind = FragmentKind::two_electron;
        f.u_tilde = inner.eigenvectors().transpose();
        sign_fix_rows(f.u_tilde);
        const Eigen::VectorXd mu = inner.eigenvalues();
        f.lambda_tilde = p.eps * (mu * mu.transpose());
        if (p.eps >= 0.0) {
            Eigen::VectorXd eta = std::sqrt(p.eps) * mu;
            f.rank1_factor = std::move(eta);
        }
        set.two_body.push_back(std::move(f));
    }
    set.residual_l1 = truncated_bound;
    set.validate();
    return set;
}

// -------------------------------- GFRO -------------------------------------

namespace {

Eigen::MatrixXd theta_to_orthogonal(const Eigen::VectorXd& theta, int n) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    int idx = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            k(i, j) = theta(idx);
            k(j, i) = -theta(idx);
            ++idx;
        }
    return k.exp();
}

// lambda_pq = sum_ijkl G_ijkl U_pi U_pj U_qk U_ql (Frobenius-optimal given U)
Eigen::MatrixXd project_lambda(const FourIndex& g, const Eigen::MatrixXd& u) {
    const int n = u.rows();
    std::vector<Eigen::MatrixXd> b(n, Eigen::MatrixXd::Zero(n, n));
    for (int p = 0; p < n; ++p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double w = u(p, i) * u(p, j);
                if (w == 0.0) continue;
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) b[p](k, l) += w * g(i, j, k, l);
            }
    }
    Eigen::MatrixXd lambda(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            lambda(p, q) = u.row(q) * b[p] * u.row(q).transpose();
    return 0.5 * (lambda + lambda.transpose());
}

double smooth_abs_sum(const FourIndex& g, double delta) {
    double s = 0.0;
    for (double v : g.data()) s += std::sqrt(v * v + delta * delta) - delta;
    return s;
}

// exact minimizer of s -> sum |G - s F| (weighted median of entry ratios)
double l1_optimal_scale(const FourIndex& g, const FourIndex& fit) {
    std::vector<std::pair<double, double>> ratio_weight;
    ratio_weight.reserve(fit.data().size());
    double total = 0.0;
    for (size_t x = 0; x < fit.data().size(); ++x) {
        const double f = fit.data()[x];
        if (std::abs(f) < 1e-300) continue;
        ratio_weight.emplace_back(g.data()[x] / f, std::abs(f));
        total += std::abs(f);
    }
    if (ratio_weight.empty()) return 0.0;
    std::sort(ratio_weight.begin(), ratio_weight.end());
    double cum = 0.0;
    for (const auto& [ratio, weight] : ratio_weight) {
        cum += weight;
        if (cum >= 0.5 * total) return ratio;
    }
    return ratio_weight.back().first;
}

double l1_after_scaled_subtraction(const FourIndex& g, const FourIndex& fit, double s) {
    double out = 0.0;
    for (size_t x = 0; x < g.data().size(); ++x)
        out += std::abs(g.data()[x] - s * fit.data()[x]);
    return out;
}

}  // namespace

FragmentSet gfro_decompose(const SpatialTensors& t, double termination_threshold,
                           const GfroConfig& config) {
    t.validate();
    if (termination_threshold <= 0.0)
        throw ValidationError("gfro_decompose: termination threshold must be positive");
    const int n = t.n_orbitals();
    const int n_theta = n * (n - 1) / 2;
    const int max_fragments =
        config.max_fragments > 0 ? config.max_fragments : 8 * n * n;

    FragmentSet set;
    set.source = FragmentSource::GFRO;
    set.h0 = diagonalize_one_electron(t.h_tilde);

    FourIndex residual = t.g_tilde;
    double l1 = residual.l1_norm();

    // refine (theta, lambda) jointly on a smoothed L1 cost
    const auto l1_refine = [&](const FourIndex& g, Eigen::VectorXd theta,
                               Eigen::MatrixXd lambda) {
        const int n_lam = n * (n + 1) / 2;
        const double scale = std::max(g.l1_norm(), 1e-30);
        Eigen::VectorXd x0(n_theta + n_lam);
        x0.head(n_theta) = theta;
        int idx = n_theta;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) x0(idx++) = lambda(i, j);
        const auto cost = [&](const Eigen::VectorXd& x) {
            const Eigen::MatrixXd uu = theta_to_orthogonal(x.head(n_theta), n);
            Eigen::MatrixXd lam(n, n);
            int id = n_theta;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j) {
                    lam(i, j) = lam(j, i) = x(id);
                    ++id;
                }
            Fragment probe{FragmentKind::two_electron, uu, lam, {}, 0.0, {}};
            FourIndex r2 = g;
            r2 -= fragment_tensor(probe);
            return smooth_abs_sum(r2, 1e-8) / scale;
        };
        auto res = detail::minimize_bfgs(cost, x0, 0.05, 1e-10, config.bfgs_max_iter);
        theta = res.x.head(n_theta);
        Eigen::MatrixXd lam(n, n);
        int id = n_theta;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                lam(i, j) = lam(j, i) = res.x(id);
                ++id;
            }
        return std::make_pair(theta_to_orthogonal(theta, n), lam);
    };

    while (l1 > termination_threshold) {
        if (set.n_fragments() >= max_fragments)
            throw ConvergenceError("gfro: fragment budget exhausted with residual L1 " +
                                       std::to_string(l1),
                                   l1);

        // cost normalized by the residual scale so the gradient tolerance
        // stays meaningful in the tail iterations
        const double fro2 = Eigen::Map<const Eigen::VectorXd>(
                                residual.data().data(),
                                static_cast<Eigen::Index>(residual.data().size()))
                                .squaredNorm();
        const auto frobenius_cost = [&](const Eigen::VectorXd& theta) {
            const Eigen::MatrixXd u = theta_to_orthogonal(theta, n);
            return -project_lambda(residual, u).squaredNorm() / std::max(fro2, 1e-30);
        };

        detail::MinimizeResult best;
        best.f = std::numeric_limits<double>::infinity();
        for (int r = 0; r <= config.random_restarts; ++r) {
            Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(n_theta);
            if (r > 0) {
                CounterRng rng(config.seed,
                               static_cast<uint64_t>(set.n_fragments()) * 1000 + r);
                for (int i = 0; i < n_theta; ++i)
                    theta0(i) = rng.uniform(-config.restart_amplitude,
                                            config.restart_amplitude);
            }
            auto res = detail::minimize_bfgs(frobenius_cost, theta0, 0.1, 1e-10,
                                             config.bfgs_max_iter);
            if (res.f < best.f) best = std::move(res);
        }

        Eigen::MatrixXd u = theta_to_orthogonal(best.x, n);
        Eigen::MatrixXd lambda = project_lambda(residual, u);
        if (config.cost == GfroConfig::Cost::l1_smoothed)
            std::tie(u, lambda) = l1_refine(residual, best.x, lambda);

        // accept the largest L1 drop along the fitted direction; the exact
        // scale keeps the residual L1 strictly decreasing
        Fragment f;
        f.kind = FragmentKind::two_electron;
        f.u_tilde = u;
        f.lambda_tilde = lambda;
        FourIndex fit = fragment_tensor(f);
        double s = 1.0;
        double l1_next = l1_after_scaled_subtraction(residual, fit, s);
        if (l1_next >= l1 * (1.0 - 1e-12)) {
            s = l1_optimal_scale(residual, fit);
            l1_next = l1_after_scaled_subtraction(residual, fit, s);
        }
        if (!(s > 0.0) || l1_next >= l1 * (1.0 - 1e-12)) {
            // Frobenius direction cannot lower the L1 norm; refine on the
            // smoothed L1 cost before giving up
            std::tie(u, lambda) = l1_refine(residual, best.x, lambda);
            f.u_tilde = u;
            f.lambda_tilde = lambda;
            fit = fragment_tensor(f);
            s = l1_optimal_scale(residual, fit);
            l1_next = l1_after_scaled_subtraction(residual, fit, s);
            if (!(s > 0.0) || l1_next >= l1 * (1.0 - 1e-12))
                throw ConvergenceError(
                    "gfro: optimizer stagnated across restarts; residual L1 " +
                        std::to_string(l1),
                    l1);
        }
        f.lambda_tilde *= s;
        fit *= s;
        residual -= fit;
        l1 = residual.l1_norm();
        set.two_body.push_back(std::move(f));
        if (config.on_iteration) config.on_iteration(set.n_fragments() - 1, l1);
    }

    set.residual_l1 = l1;
    set.validate();
    return set;
}

// ----------------------------- serialization -------------------------------

const char* to_string(FragmentSource s) {
    return s == FragmentSource::LR ? "lr" : "gfro";
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, int n) {
    if (static_cast<int>(j.size()) != n * n)
        throw ParseError("fragment file: matrix of wrong length");
    Eigen::MatrixXd m(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) m(i, jj) = j[idx++].get<double>();
    return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json fragment_to_json(const Fragment& f) {
    json out;
    out["kind"] = f.kind == FragmentKind::one_electron ? "one_electron" : "two_electron";
    out["u_tilde"] = matrix_to_json(f.u_tilde);
    if (f.kind == FragmentKind::one_electron) {
        json diag = json::array();
        for (int i = 0; i < f.n_orbitals(); ++i) diag.push_back(f.lambda_tilde(i, i));
        out["lambda_tilde"] = diag;
    } else {
        out["lambda_tilde"] = matrix_to_json(f.lambda_tilde);
    }
    out["offset"] = f.offset;
    if (f.rank1_factor) {
        json eta = json::array();
        for (Eigen::Index i = 0; i < f.rank1_factor->size(); ++i)
            eta.push_back((*f.rank1_factor)(i));
        out["rank1_factor"] = eta;
    }
    if (f.has_diag_shift()) {
        json d = json::array();
        for (Eigen::Index i = 0; i < f.diag_shift.size(); ++i) d.push_back(f.diag_shift(i));
        out["diag_shift"] = d;
    }
    return out;
}

Fragment fragment_from_json(const json& j, int n) {
    Fragment f;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "one_electron")
        f.kind = FragmentKind::one_electron;
    else if (kind == "two_electron")
        f.kind = FragmentKind::two_electron;
    else
        throw ParseError("fragment file: unknown kind '" + kind + "'");
    f.u_tilde = matrix_from_json(j.at("u_tilde"), n);
    if (f.kind == FragmentKind::one_electron) {
        const Eigen::VectorXd diag = vector_from_json(j.at("lambda_tilde"));
        if (diag.size() != n) throw ParseError("fragment file: diagonal of wrong length");
        f.lambda_tilde = diag.asDiagonal();
    } else {
        f.lambda_tilde = matrix_from_json(j.at("lambda_tilde"), n);
    }
    f.offset = j.value("offset", 0.0);
    if (j.contains("rank1_factor")) f.rank1_factor = vector_from_json(j.at("rank1_factor"));
    if (j.contains("diag_shift")) {
        f.diag_shift = vector_from_json(j.at("diag_shift"));
        if (f.diag_shift.size() != n)
            throw ParseError("fragment file: diag_shift of wrong length");
    }
    return f;
}

}  // namespace

void write_fragments(std::ostream& out, const FragmentSet& set) {
    json doc;
    doc["format"] = "fluidfrag-fragments-v1";
    doc["n_orbitals"] = set.n_orbitals();
    doc["source"] = to_string(set.source);
    doc["residual_l1"] = set.residual_l1;
    json frags = json::array();
    frags.push_back(fragment_to_json(set.h0));
    for (const auto& f : set.two_body) frags.push_back(fragment_to_json(f));
    doc["fragments"] = std::move(frags);
    out << doc.dump(1) << "\n";
}

void write_fragments_file(const std::string& path, const FragmentSet& set) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    write_fragments(out, set);
}

FragmentSet read_fragments(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("fragment file: ") + e.what());
    }
    if (doc.value("format", "") != "fluidfrag-fragments-v1")
        throw ParseError("fragment file: unknown format tag");
    const int n = doc.at("n_orbitals").get<int>();
    FragmentSet set;
    const std::string source = doc.at("source").get<std::string>();
    if (source == "lr")
        set.source = FragmentSource::LR;
    else if (source == "gfro")
        set.source = FragmentSource::GFRO;
    else
        throw ParseError("fragment file: unknown source '" + source + "'");
    set.residual_l1 = doc.at("residual_l1").get<double>();
    bool have_h0 = false;
    for (const auto& jf : doc.at("fragments")) {
        Fragment f = fragment_from_json(jf, n);
        if (f.kind == FragmentKind::one_electron) {
            if (have_h0) throw ParseError("fragment file: multiple one-electron fragments");
            set.h0 = std::move(f);
            have_h0 = true;
        } else {
            set.two_body.push_back(std::move(f));
        }
    }
    if (!have_h0) throw ParseError("fragment file: missing one-electron fragment");
    set.validate();
    return set;
}

FragmentSet read_fragments_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open fragment file: " + path);
    return read_fragments(in);
}

}  // namespace fluidfrag

#include "fluidfrag/fluid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fluidfrag {

void CovarianceCache::validate() const {
    const int nc = n_variables();
    if (cov_oo.rows() != nc || cov_oo.cols() != nc || cov_h0_o.size() != nc ||
        cov_own_o.size() != nc)
        throw ValidationError("CovarianceCache: inconsistent sizes");
    if (var_frag.size() != n_fragments + 1)
        throw ValidationError("CovarianceCache: variance vector of wrong length");
    if (symmetry_residual(cov_oo) > 1e-9)
        throw ValidationError("CovarianceCache: cov_oo not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_oo, Eigen::EigenvaluesOnly);
    if (nc > 0 && es.eigenvalues()(0) < -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
        throw ValidationError("CovarianceCache: cov_oo not positive semidefinite");
}

CovarianceCache build_cache(const FragmentSet& set, const ProxyState& proxy, Variant variant) {
    proxy.validate();
    if (2 * set.n_orbitals() != proxy.basis->n_spin_orbitals())
        throw DimensionError("build_cache: fragment set and proxy sector differ");

    const int n_f = set.n_fragments();
    const int per = variables_per_fragment(variant, set.n_orbitals());
    const int n_c = n_f * per;
    const Eigen::Index dim = proxy.amplitudes.size();

    CovarianceCache cache;
    cache.variant = variant;
    cache.n_fragments = n_f;
    cache.n_orbitals = set.n_orbitals();
    cache.frag_of.resize(n_c);
    cache.frag_offset.resize(n_f);

    // applied fragment vectors; index 0 is the one-electron fragment
    Eigen::MatrixXd h_vecs(dim, n_f + 1);
    h_vecs.col(0) = fragment_apply(set.h0, proxy);
    for (int a = 0; a < n_f; ++a) h_vecs.col(a + 1) = fragment_apply(set.two_body[a], proxy);

    Eigen::MatrixXd o_vecs(dim, n_c);
    for (int a = 0; a < n_f; ++a) {
        cache.frag_offset[a] = a * per;
        for (int i = 0; i < per; ++i) {
            const int flat = a * per + i;
            cache.frag_of[flat] = a;
            const OneBodyOperator op = extracted_operator(set.two_body[a], variant, i);
            o_vecs.col(flat) = apply_one_body(op, proxy);
        }
    }

    const Eigen::VectorXd h_means = h_vecs.transpose() * proxy.amplitudes;
    const Eigen::VectorXd o_means = o_vecs.transpose() * proxy.amplitudes;

    cache.var_frag = (h_vecs.colwise().squaredNorm().transpose() -
                      h_means.cwiseProduct(h_means));
    cache.cov_oo = 2.0 * ((o_vecs.transpose() * o_vecs) - o_means * o_means.transpose());
    cache.cov_oo = 0.5 * (cache.cov_oo + cache.cov_oo.transpose());
    cache.cov_h0_o =
        2.0 * ((o_vecs.transpose() * h_vecs.col(0)) - o_means * h_means(0));
    cache.cov_own_o.resize(n_c);
    for (int i = 0; i < n_c; ++i) {
        const int a = cache.frag_of[i];
        cache.cov_own_o(i) =
            2.0 * (o_vecs.col(i).dot(h_vecs.col(a + 1)) - o_means(i) * h_means(a + 1));
    }
    return cache;
}

Eigen::VectorXd variances_from_cache(const CovarianceCache& cache, const Eigen::VectorXd& c) {
    const int n_f = cache.n_fragments;
    const int per = cache.n_variables() / std::max(1, n_f);
    Eigen::VectorXd var(n_f + 1);
    var(0) = cache.var_frag(0) + 0.5 * c.dot(cache.cov_oo * c) + c.dot(cache.cov_h0_o);
    for (int a = 0; a < n_f; ++a) {
        const int off = cache.frag_offset[a];
        const auto c_a = c.segment(off, per);
        const auto block = cache.cov_oo.block(off, off, per, per);
        var(a + 1) = cache.var_frag(a + 1) + 0.5 * c_a.dot(block * c_a) -
                     c_a.dot(cache.cov_own_o.segment(off, per));
    }
    for (int a = 0; a <= n_f; ++a) {
        if (var(a) < -1e-9)
            throw ValidationError("variances_from_cache: negative repartitioned variance");
        var(a) = std::max(var(a), 0.0);
    }
    return var;
}

double objective(const CovarianceCache& cache, const Eigen::VectorXd& c,
                 const Eigen::VectorXd& m) {
    const Eigen::VectorXd var = variances_from_cache(cache, c);
    double s = 0.0;
    for (Eigen::Index a = 0; a < var.size(); ++a) s += var(a) / m(a);
    return s;
}

SolveInfo solve_c(const CovarianceCache& cache, const Eigen::VectorXd& m) {
    const int n_c = cache.n_variables();
    const int n_f = cache.n_fragments;
    if (m.size() != n_f + 1) throw DimensionError("solve_c: allocation of wrong length");
    if (m.minCoeff() <= 0.0) throw ValidationError("solve_c: allocation must be positive");
    const int per = n_c / std::max(1, n_f);

    Eigen::MatrixXd a_mat = cache.cov_oo / m(0);
    Eigen::VectorXd b = -cache.cov_h0_o / m(0);
    for (int a = 0; a < n_f; ++a) {
        const int off = cache.frag_offset[a];
        a_mat.block(off, off, per, per) += cache.cov_oo.block(off, off, per, per) / m(a + 1);
        b.segment(off, per) += cache.cov_own_o.segment(off, per) / m(a + 1);
    }

    SolveInfo info;
    if (n_c == 0) {
        info.c = Eigen::VectorXd();
        return info;
    }

    // pseudoinverse with relative eigenvalue threshold; directions of zero
    // proxy variance receive zero coefficient
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_mat);
    const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
    const double cut = std::max(1e-12 * lam_max, 1e-300);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n_c);
    for (int i = 0; i < n_c; ++i) {
        if (std::abs(es.eigenvalues()(i)) > cut)
            inv(i) = 1.0 / es.eigenvalues()(i);
        else
            info.rank_deficient = true;
    }
    info.c = es.eigenvectors() *
             (inv.asDiagonal() * (es.eigenvectors().transpose() * b));
    info.residual = (a_mat * info.c - b).norm();
    return info;
}

Eigen::VectorXd allocate(const Eigen::VectorXd& variances) {
    if (variances.size() == 0) throw DimensionError("allocate: empty variance vector");
    if (variances.minCoeff() < -1e-12)
        throw ValidationError("allocate: negative variance");
    Eigen::VectorXd m(variances.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < variances.size(); ++i) {
        m(i) = std::sqrt(std::max(variances(i), 0.0));
        total += m(i);
    }
    if (total <= 0.0) {
        m.setConstant(1.0 / static_cast<double>(m.size()));
        return m;
    }
    m /= total;
    m = m.cwiseMax(1e-12);
    m /= m.sum();
    return m;
}

RepartitionSolution iterate(const FragmentSet& set, const ProxyState& proxy, Variant variant,
                            double tol, int max_iter) {
    if (tol <= 0.0) throw ValidationError("iterate: tol must be positive");
    const CovarianceCache cache = build_cache(set, proxy, variant);

    RepartitionSolution sol;
    sol.variant = variant;
    sol.proxy = proxy.kind;
    sol.c = Eigen::VectorXd::Zero(cache.n_variables());
    sol.m = allocate(cache.var_frag);

    double obj_prev = objective(cache, sol.c, sol.m);
    const double slack = 1e-9 * (1.0 + std::abs(obj_prev));
    for (int it = 1; it <= max_iter; ++it) {
        SolveInfo step = solve_c(cache, sol.m);
        sol.rank_deficient = sol.rank_deficient || step.rank_deficient;
        const double obj_c = objective(cache, step.c, sol.m);
        if (obj_c > obj_prev + slack)
            throw ValidationError("iterate: objective increased in the c half-step");
        sol.c = std::move(step.c);

        const Eigen::VectorXd var = variances_from_cache(cache, sol.c);
        sol.m = allocate(var);
        double obj_m = 0.0;
        for (Eigen::Index a = 0; a < var.size(); ++a) obj_m += var(a) / sol.m(a);
        if (obj_m > obj_c + slack)
            throw ValidationError("iterate: objective increased in the m half-step");

        sol.iterations = it;
        sol.predicted_eps2M = obj_m;
        if (std::abs(obj_prev - obj_m) <= tol * std::max(1.0, std::abs(obj_m))) {
            sol.converged = true;
            break;
        }
        obj_prev = obj_m;
    }
    // end on a c-solve so the returned c is stationary at the returned m
    SolveInfo last = solve_c(cache, sol.m);
    sol.rank_deficient = sol.rank_deficient || last.rank_deficient;
    sol.stationarity_residual = last.residual;
    const double obj_last = objective(cache, last.c, sol.m);
    if (obj_last <= sol.predicted_eps2M + slack) {
        sol.c = std::move(last.c);
        sol.predicted_eps2M = obj_last;
    }
    return sol;
}

std::vector<Eigen::VectorXd> expand_coefficients(const FragmentSet& set,
                                                 const Eigen::VectorXd& c, Variant variant) {
    const int n_f = set.n_fragments();
    const int n_o = set.n_orbitals();
    const int per = variables_per_fragment(variant, n_o);
    if (c.size() != static_cast<Eigen::Index>(n_f) * per)
        throw DimensionError("expand_coefficients: c length disagrees with variant");
    std::vector<Eigen::VectorXd> out(n_f);
    for (int a = 0; a < n_f; ++a) {
        const auto& f = set.two_body[a];
        switch (variant) {
            case Variant::full:
                out[a] = c.segment(a * per, per);
                break;
            case Variant::r1:
                out[a] = c(a) * f.lambda_tilde.diagonal();
                break;
            case Variant::r2:
                out[a] = c(a) * 2.0 * f.lambda_tilde.rowwise().sum();
                break;
        }
    }
    return out;
}

FragmentSet apply_repartition(const FragmentSet& set, const Eigen::VectorXd& c,
                              Variant variant) {
    if (c.size() == 0 || c.cwiseAbs().maxCoeff() == 0.0) return set;
    const auto coeffs = expand_coefficients(set, c, variant);
    const int n_o = set.n_orbitals();

    FragmentSet out = set;
    Eigen::VectorXd eps0 = set.h0.lambda_tilde.diagonal();
    if (set.h0.diag_shift.size() > 0) eps0 += set.h0.diag_shift;
    Eigen::MatrixXd h_new = set.h0.u_tilde.transpose() * eps0.asDiagonal() * set.h0.u_tilde;
    for (int a = 0; a < set.n_fragments(); ++a) {
        auto& f = out.two_body[a];
        if (f.diag_shift.size() == 0) f.diag_shift = Eigen::VectorXd::Zero(n_o);
        f.diag_shift -= coeffs[a];
        h_new += f.u_tilde.transpose() * coeffs[a].asDiagonal() * f.u_tilde;
    }
    const double offset0 = set.h0.offset;
    out.h0 = diagonalize_one_electron(h_new);
    out.h0.offset = offset0;
    return out;
}

// ------------------------------ serialization ------------------------------

namespace {
using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vec_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

ProxyKind proxy_from_string(const std::string& s) {
    if (s == "hf") return ProxyKind::HF;
    if (s == "cisd") return ProxyKind::CISD;
    if (s == "fci") return ProxyKind::FCI;
    throw ParseError("unknown proxy kind '" + s + "'");
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "r1") return Variant::r1;
    if (s == "r2") return Variant::r2;
    throw ParseError("unknown variant '" + s + "'");
}

}  // namespace

void write_solution(std::ostream& out, const RepartitionSolution& s) {
    json doc;
    doc["format"] = "fluidfrag-solution-v1";
    doc["variant"] = to_string(s.variant);
    doc["proxy"] = to_string(s.proxy);
    doc["c"] = vec_to_json(s.c);
    doc["m"] = vec_to_json(s.m);
    doc["predicted_eps2M"] = s.predicted_eps2M;
    doc["iterations"] = s.iterations;
    doc["converged"] = s.converged;
    doc["rank_deficient"] = s.rank_deficient;
    doc["stationarity_residual"] = s.stationarity_residual;
    out << doc.dump(1) << "\n";
}

void write_solution_file(const std::string& path, const RepartitionSolution& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    write_solution(out, s);
}

RepartitionSolution read_solution(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("solution file: ") + e.what());
    }
    if (doc.value("format", "") != "fluidfrag-solution-v1")
        throw ParseError("solution file: unknown format tag");
    RepartitionSolution s;
    s.variant = variant_from_string(doc.at("variant").get<std::string>());
    s.proxy = proxy_from_string(doc.at("proxy").get<std::string>());
    s.c = vec_from_json(doc.at("c"));
    s.m = vec_from_json(doc.at("m"));
    s.predicted_eps2M = doc.at("predicted_eps2M").get<double>();
    s.iterations = doc.at("iterations").get<int>();
    s.converged = doc.at("converged").get<bool>();
    s.rank_deficient = doc.value("rank_deficient", false);
    s.stationarity_residual = doc.value("stationarity_residual", 0.0);
    if (s.m.size() == 0 || s.m.minCoeff() <= 0.0 ||
        std::abs(s.m.sum() - 1.0) > 1e-9)
        throw ValidationError("solution file: m is not a positive simplex vector");
    return s;
}

RepartitionSolution read_solution_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open solution file: " + path);
    return read_solution(in);
}

}  // namespace fluidfrag

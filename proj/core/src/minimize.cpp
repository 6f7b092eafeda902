#include "minimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>

namespace fluidfrag::detail {

namespace {

struct Closure {
    const ObjectiveFn* f;
    Eigen::VectorXd scratch;
};

double eval_f(const gsl_vector* x, void* params) {
    auto* c = static_cast<Closure*>(params);
    for (size_t i = 0; i < x->size; ++i) c->scratch(static_cast<Eigen::Index>(i)) =
        gsl_vector_get(x, i);
    return (*c->f)(c->scratch);
}

void eval_df(const gsl_vector* x, void* params, gsl_vector* g) {
    auto* c = static_cast<Closure*>(params);
    Eigen::VectorXd v(x->size);
    for (size_t i = 0; i < x->size; ++i) v(static_cast<Eigen::Index>(i)) = gsl_vector_get(x, i);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double orig = v(i);
        v(i) = orig + h;
        const double fp = (*c->f)(v);
        v(i) = orig - h;
        const double fm = (*c->f)(v);
        v(i) = orig;
        gsl_vector_set(g, static_cast<size_t>(i), (fp - fm) / (2.0 * h));
    }
}

void eval_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
    *f = eval_f(x, params);
    eval_df(x, params, g);
}

}  // namespace

MinimizeResult minimize_bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                             double initial_step, double grad_tol, int max_iter) {
    gsl_set_error_handler_off();

    MinimizeResult result;
    result.x = x0;
    if (x0.size() == 0) {
        result.f = f(x0);
        result.converged = true;
        return result;
    }

    Closure closure{&f, Eigen::VectorXd(x0.size())};
    gsl_multimin_function_fdf target;
    target.n = static_cast<size_t>(x0.size());
    target.f = &eval_f;
    target.df = &eval_df;
    target.fdf = &eval_fdf;
    target.params = &closure;

    gsl_vector* x = gsl_vector_alloc(target.n);
    for (Eigen::Index i = 0; i < x0.size(); ++i) gsl_vector_set(x, static_cast<size_t>(i), x0(i));

    const gsl_multimin_fdfminimizer_type* type = gsl_multimin_fdfminimizer_vector_bfgs2;
    gsl_multimin_fdfminimizer* mini = gsl_multimin_fdfminimizer_alloc(type, target.n);
    gsl_multimin_fdfminimizer_set(mini, &target, x, initial_step, 0.1);

    int it = 0;
    for (; it < max_iter; ++it) {
        const int status = gsl_multimin_fdfminimizer_iterate(mini);
        if (status) break;  // GSL_ENOPROG: line search cannot improve
        if (gsl_multimin_test_gradient(mini->gradient, grad_tol) == GSL_SUCCESS) {
            result.converged = true;
            ++it;
            break;
        }
    }

    for (Eigen::Index i = 0; i < x0.size(); ++i)
        result.x(i) = gsl_vector_get(mini->x, static_cast<size_t>(i));
    result.f = mini->f;
    result.iterations = it;

    gsl_multimin_fdfminimizer_free(mini);
    gsl_vector_free(x);

    // never return a point worse than the start
    const double f0 = f(x0);
    if (f0 < result.f) {
        result.x = x0;
        result.f = f0;
    }
    return result;
}

}  // namespace fluidfrag::detail

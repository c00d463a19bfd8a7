#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace qjscc {

/// Numerical tolerances shared by root finding, quadrature and line search.
struct Tolerances {
    double root_abs = 1e-12;    ///< absolute residual tolerance for scalar roots
    double quad_rel = 1e-10;    ///< relative tolerance for adaptive quadrature
    double search_abs = 1e-10;  ///< interval tolerance for 1-D line search

    void validate() const;
};

/// Thrown when adaptive quadrature exhausts its panel budget. Carries the
/// best estimate so callers may decide to proceed with degraded accuracy.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best, double err)
        : std::runtime_error(what), best_estimate(best), abs_error(err) {}
    double best_estimate;
    double abs_error;
};

/// Thrown when bisection is handed endpoints with the same sign.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
/// Q(z) without the finiteness check; accepts +-inf (-> 0 / 1).
inline double q_raw(double z) { return 0.5 * std::erfc(z * 0.7071067811865475244); }
}  // namespace detail

/// Gaussian upper-tail probability Q(z) = Pr(N(0,1) > z).
double q_function(double z);

/// E[g(V)] for V ~ N(0, sigma^2), integrated adaptively on [-8 sigma, 8 sigma].
/// The truncated tail mass (2 Q(8) ~ 1.24e-15) is below quad_rel for the
/// default tolerances.
double gaussian_expectation(const std::function<double(double)>& g, double sigma,
                            const Tolerances& tol = {});

/// Same, with initial panel boundaries at `split_points` so that integrand
/// kinks or jumps (grid nodes, step breakpoints, outage-region edges) never
/// sit inside a panel. Points outside the domain are ignored.
double gaussian_expectation(const std::function<double(double)>& g, double sigma,
                            const Tolerances& tol, std::span<const double> split_points);

/// Adaptive Gauss-Kronrod 7/15 integration of f on [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, std::span<const double> split_points = {},
                          int max_panels = 40000);

/// Unique u >= 0 with u * exp(u^2 / (2 sigma_w^2)) = c, for c >= 0.
/// Bisection bracket plus safeguarded Newton on the log form, so extreme
/// Lagrange multipliers (c up to ~1e300) stay representable.
double solve_exp_growth_root(double c, double sigma_w, const Tolerances& tol = {});

/// Same root for c given as log(c); works for c far beyond double range.
double solve_exp_growth_root_log(double log_c, double sigma_w, const Tolerances& tol = {});

struct MinResult {
    double argmin = 0;
    double min = 0;
};

/// Golden-section minimization of h on [lo, hi] down to interval width
/// `tol.search_abs`. For unimodal h this is the global minimum on the
/// interval; boundary minima are returned at (or within tol of) the endpoint.
MinResult golden_section_min(const std::function<double(double)>& h, double lo, double hi,
                             const Tolerances& tol = {});

/// Bisection root of a continuous monotone h on [lo, hi] with h(lo)h(hi) <= 0.
double bisect_monotone(const std::function<double(double)>& h, double lo, double hi,
                       const Tolerances& tol = {});

}  // namespace qjscc

#include "qjscc/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qjscc {

void Tolerances::validate() const {
    if (!(root_abs > 0) || !(quad_rel > 0) || !(search_abs > 0))
        throw std::invalid_argument("Tolerances: all fields must be strictly positive");
}

double q_function(double z) {
    if (!std::isfinite(z)) throw std::domain_error("q_function: non-finite argument");
    return detail::q_raw(z);
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK dqk15 values).
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct Panel {
    double a, b, value, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXgk[i];
        const double fsum = f(c - x) + f(c + x);
        resk += kWgk[i] * fsum;
        if (i % 2 == 1) resg += kWg[i / 2] * fsum;
    }
    return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, std::span<const double> split_points,
                          int max_panels) {
    if (!(a < b)) return 0.0;
    std::vector<double> edges;
    edges.reserve(split_points.size() + 2);
    edges.push_back(a);
    for (double s : split_points)
        if (s > a && s < b) edges.push_back(s);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Panel> panels;
    panels.reserve(edges.size() + 64);
    double total = 0, err = 0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        panels.push_back(gk15(f, edges[i], edges[i + 1]));
        total += panels.back().value;
        err += panels.back().error;
    }

    auto tolerance = [&] { return rel_tol * std::max(std::abs(total), 1.0); };
    while (err > tolerance()) {
        if (static_cast<int>(panels.size()) >= max_panels)
            throw QuadratureError("integrate_adaptive: panel budget exhausted", total, err);
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& x, const Panel& y) { return x.error < y.error; });
        const Panel old = *worst;
        const double mid = 0.5 * (old.a + old.b);
        if (mid <= old.a || mid >= old.b)
            throw QuadratureError("integrate_adaptive: panel below machine resolution", total, err);
        const Panel left = gk15(f, old.a, mid);
        const Panel right = gk15(f, mid, old.b);
        total += left.value + right.value - old.value;
        err += left.error + right.error - old.error;
        *worst = left;
        panels.push_back(right);
    }
    return total;
}

double gaussian_expectation(const std::function<double(double)>& g, double sigma,
                            const Tolerances& tol) {
    return gaussian_expectation(g, sigma, tol, {});
}

double gaussian_expectation(const std::function<double(double)>& g, double sigma,
                            const Tolerances& tol, std::span<const double> split_points) {
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw std::invalid_argument("gaussian_expectation: sigma must be positive");
    tol.validate();
    const double inv = 1.0 / sigma;
    const double norm = inv * 0.3989422804014326779;  // 1/(sigma sqrt(2 pi))
    auto integrand = [&](double v) { return norm * std::exp(-0.5 * v * v * inv * inv) * g(v); };
    return integrate_adaptive(integrand, -8.0 * sigma, 8.0 * sigma, tol.quad_rel, split_points);
}

double solve_exp_growth_root(double c, double sigma_w, const Tolerances& tol) {
    if (!(c >= 0) || !std::isfinite(c))
        throw std::invalid_argument("solve_exp_growth_root: c must be finite and >= 0");
    if (c == 0) return 0.0;
    return solve_exp_growth_root_log(std::log(c), sigma_w, tol);
}

double solve_exp_growth_root_log(double log_c, double sigma_w, const Tolerances& tol) {
    if (!(sigma_w > 0) || !std::isfinite(sigma_w))
        throw std::invalid_argument("solve_exp_growth_root_log: sigma_w must be positive");
    tol.validate();
    const double inv2s2 = 1.0 / (2.0 * sigma_w * sigma_w);
    // h(u) = log u + u^2/(2 sw^2) - log_c is strictly increasing on (0, inf).
    auto h = [&](double u) { return std::log(u) + u * u * inv2s2 - log_c; };

    double hi = (log_c <= 0) ? std::exp(log_c)
                             : sigma_w * std::sqrt(2.0 * log_c) + 1.0;
    if (!(hi > 0)) return 0.0;  // c underflows: root below double resolution
    while (h(hi) < 0) hi *= 2.0;
    double lo = hi;
    while (h(lo) > 0) {
        lo *= 0.25;
        if (lo < std::numeric_limits<double>::min()) return 0.0;
    }

    // Newton iterations, falling back to bisection when a step leaves [lo, hi].
    // |u e^{u^2/2s^2} - c| ~= c |h(u)| for small h; drive h to machine level so
    // the forward residual meets root_abs for any c of practical size.
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double res = h(u);
        if (std::abs(res) < 1e-15 * std::max(1.0, std::abs(log_c))) break;
        if (res > 0)
            hi = u;
        else
            lo = u;
        if (hi - lo < 4e-16 * u) break;
        const double dres = 1.0 / u + 2.0 * u * inv2s2;
        double next = u - res / dres;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

MinResult golden_section_min(const std::function<double(double)>& h, double lo, double hi,
                             const Tolerances& tol) {
    if (!(lo < hi)) throw std::invalid_argument("golden_section_min: requires lo < hi");
    tol.validate();
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = h(x1), f2 = h(x2);
    while (b - a > tol.search_abs) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = h(x2);
        }
    }
    // Include the original endpoints so boundary minima are exact.
    double xs[4] = {lo, 0.5 * (a + b), hi, f1 <= f2 ? x1 : x2};
    MinResult best{xs[0], h(xs[0])};
    for (int i = 1; i < 4; ++i) {
        const double v = h(xs[i]);
        if (v < best.min) best = {xs[i], v};
    }
    return best;
}

double bisect_monotone(const std::function<double(double)>& h, double lo, double hi,
                       const Tolerances& tol) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_monotone: requires lo < hi");
    tol.validate();
    double flo = h(lo), fhi = h(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw BracketError("bisect_monotone: h(lo) and h(hi) have the same sign");
    while (hi - lo > tol.search_abs) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = h(mid);
        if (std::abs(fmid) <= tol.root_abs) return mid;
        if ((fmid > 0) == (fhi > 0)) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace qjscc

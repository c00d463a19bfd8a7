#include "qjscc/encoder.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace qjscc {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310005024;
}

GridMapping prop1_encoder(double lambda, const SourceSpec& source, double sigma_w,
                          const Eigen::ArrayXd& v_grid, const Tolerances& tol) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw std::invalid_argument("prop1_encoder: lambda must be positive");
    if (!(sigma_w > 0)) throw std::invalid_argument("prop1_encoder: sigma_w must be positive");
    source.validate();

    const double log_scale = std::log(kSqrt2Pi * sigma_w * lambda);
    Eigen::ArrayXd f(v_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        const double v = v_grid[i];
        if (v == 0) {
            f[i] = 0;
            continue;
        }
        const double u = solve_exp_growth_root_log(std::log(std::abs(v)) - log_scale, sigma_w, tol);
        f[i] = std::copysign(u, v);
    }
    return make_grid_mapping(v_grid, std::move(f), source, tol);
}

double calibrate_lambda_generic(const std::function<double(double)>& power_of_lambda,
                                double target_power, double power_rel_tol) {
    if (!(target_power > 0))
        throw std::invalid_argument("calibrate_lambda: target power must be > 0");

    struct Probe {
        double log_lambda;
        double power;
    };
    auto probe = [&](double log_lambda) {
        return Probe{log_lambda, power_of_lambda(std::exp(log_lambda))};
    };

    // Power decreases as lambda grows. Expand with accelerating log steps so
    // extreme targets (P ~ 1e3 needs lambda ~ e^-500) bracket quickly.
    Probe lo = probe(0.0);  // "lo" and "hi" refer to log lambda
    Probe hi = lo;
    double step = std::log(2.0);
    int expansions = 0;
    if (lo.power < target_power) {
        while (lo.power < target_power) {
            if (++expansions > 60)
                throw CalibrationError("calibrate_lambda: bracket expansion failed (low side)");
            hi = lo;
            lo = probe(lo.log_lambda - step);
            step *= 2;
        }
    } else {
        while (hi.power > target_power) {
            if (++expansions > 60)
                throw CalibrationError("calibrate_lambda: bracket expansion failed (high side)");
            lo = hi;
            hi = probe(hi.log_lambda + step);
            step *= 2;
        }
    }
    if (lo.power < hi.power)
        throw CalibrationError("calibrate_lambda: designer power is not decreasing in lambda");

    Probe best = std::abs(lo.power - target_power) < std::abs(hi.power - target_power) ? lo : hi;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(best.power - target_power) <= power_rel_tol * target_power) break;
        if (hi.log_lambda - lo.log_lambda < 1e-14 * std::max(1.0, std::abs(lo.log_lambda))) break;
        Probe mid = probe(0.5 * (lo.log_lambda + hi.log_lambda));
        if (std::abs(mid.power - target_power) < std::abs(best.power - target_power)) best = mid;
        if (mid.power > target_power)
            lo = mid;
        else
            hi = mid;
    }
    if (std::abs(best.power - target_power) > 1e-3 * target_power)
        throw CalibrationError("calibrate_lambda: could not meet the power constraint");
    return std::exp(best.log_lambda);
}

CalibratedDesign calibrate_lambda(const std::function<GridMapping(double)>& designer,
                                  double target_power, const Tolerances& tol,
                                  double power_rel_tol) {
    tol.validate();
    const double lambda = calibrate_lambda_generic(
        [&](double l) { return designer(l).mean_power; }, target_power, power_rel_tol);
    return {lambda, designer(lambda)};
}

GridMapping linear_encoder(double power, const SourceSpec& source,
                           const Eigen::ArrayXd& v_grid, const Tolerances& tol) {
    if (!(power > 0)) throw std::invalid_argument("linear_encoder: power must be > 0");
    source.validate();
    const double slope = std::sqrt(power) / source.sigma_v;
    return make_grid_mapping(v_grid, slope * v_grid, source, tol);
}

PamDesign pam_encoder(int levels, const Eigen::ArrayXd& source_thresholds, double power,
                      const SourceSpec& source) {
    if (levels < 2) throw std::invalid_argument("pam_encoder: need M >= 2");
    if (source_thresholds.size() != levels - 1)
        throw std::invalid_argument("pam_encoder: need M - 1 source thresholds");
    if (!(power > 0)) throw std::invalid_argument("pam_encoder: power must be > 0");
    source.validate();
    for (Eigen::Index i = 0; i < source_thresholds.size(); ++i) {
        if (!std::isfinite(source_thresholds[i]))
            throw std::invalid_argument("pam_encoder: thresholds must be finite");
        if (i > 0 && !(source_thresholds[i - 1] < source_thresholds[i]))
            throw std::invalid_argument("pam_encoder: thresholds must ascend");
    }

    // E[X^2] = A^2 sum_l (2l - 1 - M)^2 Pr(V in cell l)
    double coeff2_mass = 0;
    Eigen::ArrayXd coeff(levels);
    for (int l = 0; l < levels; ++l) {
        coeff[l] = 2.0 * (l + 1) - 1.0 - levels;
        const double lo = (l == 0) ? -std::numeric_limits<double>::infinity()
                                   : source_thresholds[l - 1];
        const double hi = (l == levels - 1) ? std::numeric_limits<double>::infinity()
                                            : source_thresholds[l];
        const double mass =
            detail::q_raw(lo / source.sigma_v) - detail::q_raw(hi / source.sigma_v);
        coeff2_mass += coeff[l] * coeff[l] * mass;
    }
    if (!(coeff2_mass > 1e-300))
        throw DegeneratePowerError("pam_encoder: all probability mass on the zero symbol");

    PamDesign design;
    design.amplitude = std::sqrt(power / coeff2_mass);
    design.mapping.breakpoints = source_thresholds;
    design.mapping.values = design.amplitude * coeff;
    design.mapping.validate();
    return design;
}

Eigen::ArrayXd DopDesign::decoder_values() const {
    Eigen::ArrayXd v(2);
    v << -v_hat1, v_hat1;  // outcome 0 = negative cell, outcome 1 = non-negative cell
    return v;
}

DopDesign dop_onebit_design(double lambda, double target_d, const SourceSpec& source,
                            double sigma_w, const Tolerances& tol) {
    if (!(lambda > 0)) throw std::invalid_argument("dop_onebit_design: lambda must be > 0");
    if (!(target_d > 0)) throw std::invalid_argument("dop_onebit_design: D must be > 0");
    source.validate();

    const double sd = std::sqrt(target_d);
    const double u =
        solve_exp_growth_root_log(-std::log(2.0 * kSqrt2Pi * sigma_w * lambda), sigma_w, tol);
    const double cost = detail::q_raw(u / sigma_w) + lambda * u * u;

    // Eq-form Lagrangian over the interval placement parameter a.
    auto objective = [&](double a) {
        const double sv = source.sigma_v;
        return 2.0 * detail::q_raw((2.0 * sd - a) / sv) +
               2.0 * cost * (detail::q_raw(a / sv) - detail::q_raw((2.0 * sd - a) / sv));
    };

    // The objective can be multimodal at intermediate lambda; restart the
    // golden search from 8 equispaced seed intervals and keep the best.
    MinResult best{sd, objective(sd)};
    const double at0 = objective(0.0);
    if (at0 < best.min) best = {0.0, at0};
    constexpr int kSeeds = 8;
    for (int s = 0; s < kSeeds; ++s) {
        const double a0 = sd * s / kSeeds;
        const double a1 = sd * (s + 1) / kSeeds;
        const MinResult r = golden_section_min(objective, a0, a1, tol);
        if (r.min < best.min) best = r;
    }

    DopDesign design;
    design.a_star = best.argmin;
    design.u = u;
    design.v_hat1 = sd - design.a_star;
    design.target_d = target_d;
    design.lambda = lambda;

    // f = +u on (a, 2 sqrt(D) - a), -u mirrored, 0 elsewhere.
    const double a = design.a_star;
    const double outer = 2.0 * sd - a;
    if (outer - a < 1e-12 * sd) {
        design.mapping.breakpoints = Eigen::ArrayXd(0);
        design.mapping.values = Eigen::ArrayXd::Zero(1);
    } else if (a < 1e-12 * sd) {
        design.mapping.breakpoints = Eigen::ArrayXd(3);
        design.mapping.breakpoints << -outer, 0.0, outer;
        design.mapping.values = Eigen::ArrayXd(4);
        design.mapping.values << 0.0, -u, u, 0.0;
    } else {
        design.mapping.breakpoints = Eigen::ArrayXd(4);
        design.mapping.breakpoints << -outer, -a, a, outer;
        design.mapping.values = Eigen::ArrayXd(5);
        design.mapping.values << 0.0, -u, 0.0, u, 0.0;
    }
    design.mapping.validate();
    return design;
}

}  // namespace qjscc

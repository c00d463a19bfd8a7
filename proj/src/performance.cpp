#include "qjscc/performance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qjscc {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kPi = 3.14159265358979323846;

std::vector<double> coverage_splits(const Mapping& mapping, const DecoderTable& table,
                                    double half_width) {
    std::vector<double> splits = knots(mapping);
    for (Eigen::Index j = 0; j < table.v_hat.size(); ++j) {
        splits.push_back(table.v_hat[j] - half_width);
        splits.push_back(table.v_hat[j] + half_width);
    }
    return splits;
}
}  // namespace

EvalResult mse_eval(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                    const SourceSpec& source, const Tolerances& tol) {
    fe.validate();
    source.validate();
    const int m = fe.outcome_count();
    if (table.v_hat.size() != m)
        throw std::invalid_argument("mse_eval: table size does not match the front end");
    const std::vector<double> splits = knots(mapping);
    const double distortion = gaussian_expectation(
        [&](double v) {
            const double x = evaluate(mapping, v);
            double acc = 0;
            for (int j = 0; j < m; ++j) {
                const double d = v - table.v_hat[j];
                acc += outcome_prob_given_input(x, j, fe) * d * d;
            }
            return acc;
        },
        source.sigma_v, tol, splits);
    const double power = measure_power(mapping, source, tol);
    return {distortion, power, snr(power, fe.channel), Criterion::mse, 0.0};
}

double mse_via_orthogonality(const Mapping& mapping, const DecoderTable& table,
                             const FrontEnd& fe, const SourceSpec& source,
                             const Tolerances& tol) {
    const int m = fe.outcome_count();
    const std::vector<double> splits = knots(mapping);
    const double cross = gaussian_expectation(
        [&](double v) {
            const double x = evaluate(mapping, v);
            double acc = 0;
            for (int j = 0; j < m; ++j)
                acc += outcome_prob_given_input(x, j, fe) * table.v_hat[j];
            return v * acc;
        },
        source.sigma_v, tol, splits);
    return source.sigma_v * source.sigma_v - cross;
}

EvalResult dop_eval(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                    const SourceSpec& source, double target_d, const Tolerances& tol) {
    fe.validate();
    source.validate();
    if (!(target_d > 0)) throw std::invalid_argument("dop_eval: D must be > 0");
    const int m = fe.outcome_count();
    if (table.v_hat.size() != m)
        throw std::invalid_argument("dop_eval: table size does not match the front end");
    const double half_width = std::sqrt(target_d);
    const std::vector<double> splits = coverage_splits(mapping, table, half_width);
    const double covered = gaussian_expectation(
        [&](double v) {
            const double x = evaluate(mapping, v);
            double acc = 0;
            for (int j = 0; j < m; ++j) {
                const double d = v - table.v_hat[j];
                if (d * d < target_d) acc += outcome_prob_given_input(x, j, fe);
            }
            return acc;
        },
        source.sigma_v, tol, splits);
    const double power = measure_power(mapping, source, tol);
    return {1.0 - covered, power, snr(power, fe.channel), Criterion::dop, target_d};
}

double source_outage(const Eigen::ArrayXd& points, double target_d, const SourceSpec& source) {
    source.validate();
    if (!(target_d > 0)) throw std::invalid_argument("source_outage: D must be > 0");
    const double hw = std::sqrt(target_d);
    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(points.size());
    for (double p : points) intervals.emplace_back(p - hw, p + hw);
    std::sort(intervals.begin(), intervals.end());
    double covered = 0, cur_lo = 0, cur_hi = 0;
    bool open = false;
    for (const auto& [lo, hi] : intervals) {
        if (!open) {
            cur_lo = lo;
            cur_hi = hi;
            open = true;
        } else if (lo <= cur_hi) {
            cur_hi = std::max(cur_hi, hi);
        } else {
            covered += detail::q_raw(cur_lo / source.sigma_v) - detail::q_raw(cur_hi / source.sigma_v);
            cur_lo = lo;
            cur_hi = hi;
        }
    }
    if (open)
        covered += detail::q_raw(cur_lo / source.sigma_v) - detail::q_raw(cur_hi / source.sigma_v);
    return 1.0 - covered;
}

double mse_linear_closed(double gamma, double sigma_v) {
    if (!(gamma >= 0)) throw std::invalid_argument("mse_linear_closed: gamma must be >= 0");
    return sigma_v * sigma_v * (1.0 - (2.0 / kPi) * (gamma / (gamma + 1.0)));
}

double mse_bpsk_closed(double gamma, double sigma_v) {
    if (!(gamma >= 0)) throw std::invalid_argument("mse_bpsk_closed: gamma must be >= 0");
    const double corr = 1.0 - 2.0 * detail::q_raw(std::sqrt(gamma));
    return sigma_v * sigma_v * (1.0 - (2.0 / kPi) * corr * corr);
}

double mse_pam_closed(int levels, const Eigen::ArrayXd& source_thresholds, double gamma,
                      double sigma_v) {
    if (levels < 2) throw std::invalid_argument("mse_pam_closed: need M >= 2");
    if (source_thresholds.size() != levels - 1)
        throw std::invalid_argument("mse_pam_closed: need M - 1 thresholds");
    if (!(gamma >= 0)) throw std::invalid_argument("mse_pam_closed: gamma must be >= 0");

    // S_l^2 = (2l-1-M)^2 gamma / sum_m (2m-1-M)^2 Pr(cell m); the signed S_l
    // is the normalized channel input of cell l.
    double coeff2_mass = 0;
    for (int l = 0; l < levels; ++l) {
        const double c = 2.0 * (l + 1) - 1.0 - levels;
        const double lo =
            (l == 0) ? -std::numeric_limits<double>::infinity() : source_thresholds[l - 1];
        const double hi =
            (l == levels - 1) ? std::numeric_limits<double>::infinity() : source_thresholds[l];
        coeff2_mass += c * c * (detail::q_raw(lo / sigma_v) - detail::q_raw(hi / sigma_v));
    }
    if (!(coeff2_mass > 1e-300)) return sigma_v * sigma_v;  // nothing transmitted

    auto std_pdf = [](double z) {
        return std::isfinite(z) ? kInvSqrt2Pi * std::exp(-0.5 * z * z) : 0.0;
    };
    double acc = 0;  // sum_l Q(S_l) * (1/sigma_v) int_cell v phi(v/sigma_v) dv
    for (int l = 0; l < levels; ++l) {
        const double c = 2.0 * (l + 1) - 1.0 - levels;
        const double s_l = c * std::sqrt(gamma / coeff2_mass);
        const double lo =
            (l == 0) ? -std::numeric_limits<double>::infinity() : source_thresholds[l - 1];
        const double hi =
            (l == levels - 1) ? std::numeric_limits<double>::infinity() : source_thresholds[l];
        const double partial_moment = sigma_v * (std_pdf(lo / sigma_v) - std_pdf(hi / sigma_v));
        acc += detail::q_raw(s_l) * partial_moment;
    }
    const double v_hat = 2.0 * acc;
    return sigma_v * sigma_v - v_hat * v_hat;
}

Pam3Result mse_pam3_optimized(double gamma, double sigma_v, const Tolerances& tol) {
    auto objective = [&](double c) {
        Eigen::ArrayXd thr(2);
        thr << -c, c;
        return mse_pam_closed(3, thr, gamma, sigma_v);
    };
    MinResult best{1e-9, objective(1e-9)};
    constexpr int kSeeds = 8;
    const double c_max = 5.0 * sigma_v;
    for (int s = 0; s < kSeeds; ++s) {
        const MinResult r = golden_section_min(objective, 1e-9 + c_max * s / kSeeds,
                                               c_max * (s + 1) / kSeeds, tol);
        if (r.min < best.min) best = r;
    }
    return {best.min, best.argmin};
}

double dop_onebit_closed(double a, double u, double target_d, const SourceSpec& source,
                         double sigma_w, double lambda) {
    source.validate();
    const double sd = std::sqrt(target_d);
    if (!(a >= 0) || a > sd + 1e-12)
        throw std::invalid_argument("dop_onebit_closed: a must lie in [0, sqrt(D)]");
    const double sv = source.sigma_v;
    const double cost = detail::q_raw(u / sigma_w) + lambda * u * u;
    return 2.0 * detail::q_raw((2.0 * sd - a) / sv) +
           2.0 * cost * (detail::q_raw(a / sv) - detail::q_raw((2.0 * sd - a) / sv));
}

double shannon_opta(double gamma, double sigma_v) {
    if (!(gamma >= 0)) throw std::invalid_argument("shannon_opta: gamma must be >= 0");
    return sigma_v * sigma_v / (1.0 + gamma);
}

double low_snr_slope(const std::function<double(double)>& curve) {
    constexpr double kGamma0 = 1e-4;
    return (curve(2.0 * kGamma0) - curve(0.0)) / (2.0 * kGamma0);
}

}  // namespace qjscc

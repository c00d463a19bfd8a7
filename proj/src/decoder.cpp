#include "qjscc/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qjscc {

double outcome_prob_given_input(double x, int outcome, const FrontEnd& fe) {
    const int n = fe.branches();
    if (outcome < 0 || outcome >= fe.outcome_count())
        throw std::domain_error("outcome_prob_given_input: outcome out of range");
    if (n == 1) {
        const double sw = fe.channel.noise_sigmas[0];
        return detail::q_raw((fe.quantizer.lower_edge(outcome) - x) / sw) -
               detail::q_raw((fe.quantizer.upper_edge(outcome) - x) / sw);
    }
    const OutcomeIndex oi = outcome_bits(outcome, n);
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
        const double sw = fe.channel.noise_sigmas[i];
        p *= oi.bits[i] ? detail::q_raw(x / sw) : detail::q_raw(-x / sw);
    }
    return p;
}

double transition_prob(double v, int outcome, const Mapping& mapping, const FrontEnd& fe) {
    return outcome_prob_given_input(evaluate(mapping, v), outcome, fe);
}

DecoderTable mmse_table(const Mapping& mapping, const FrontEnd& fe, const SourceSpec& source,
                        const Tolerances& tol) {
    fe.validate();
    source.validate();
    const int m = fe.outcome_count();
    const std::vector<double> splits = knots(mapping);
    DecoderTable table;
    table.criterion = Criterion::mse;
    table.v_hat = Eigen::ArrayXd::Zero(m);
    for (int j = 0; j < m; ++j) {
        auto prob = [&](double v) { return transition_prob(v, j, mapping, fe); };
        const double den = gaussian_expectation(prob, source.sigma_v, tol, splits);
        if (den < 1e-14) continue;  // empty cell reconstructs to the prior mean
        const double num = gaussian_expectation([&](double v) { return v * prob(v); },
                                                source.sigma_v, tol, splits);
        table.v_hat[j] = num / den;
    }
    return table;
}

namespace {

// Cumulative integral of rho(v) = phi(v / sigma_v) Pr(j | v) / sigma_v on a
// fine uniform grid; window masses come from two interpolated lookups.
struct WindowMass {
    double lo, step;
    std::vector<double> cumulative;

    double at(double x) const {
        const double t = (x - lo) / step;
        if (t <= 0) return cumulative.front();
        if (t >= static_cast<double>(cumulative.size() - 1)) return cumulative.back();
        const size_t i = static_cast<size_t>(t);
        const double frac = t - static_cast<double>(i);
        return cumulative[i] + frac * (cumulative[i + 1] - cumulative[i]);
    }
    double window(double center, double half_width) const {
        return at(center + half_width) - at(center - half_width);
    }
};

WindowMass build_window_mass(const Mapping& mapping, const FrontEnd& fe,
                             const SourceSpec& source, int outcome, double half_width,
                             int steps_per_sigma) {
    const double sv = source.sigma_v;
    WindowMass wm;
    wm.lo = -(8.0 * sv + half_width);
    wm.step = sv / steps_per_sigma;
    const size_t n = static_cast<size_t>(std::ceil(2.0 * (8.0 * sv + half_width) / wm.step)) + 1;
    wm.cumulative.resize(n);
    const double norm = 0.3989422804014326779 / sv;
    double prev_rho = 0.0, acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double v = wm.lo + static_cast<double>(i) * wm.step;
        const double rho = norm * std::exp(-0.5 * (v / sv) * (v / sv)) *
                           transition_prob(v, outcome, mapping, fe);
        if (i > 0) acc += 0.5 * (prev_rho + rho) * wm.step;
        wm.cumulative[i] = acc;
        prev_rho = rho;
    }
    return wm;
}

}  // namespace

DecoderTable dop_table(const Mapping& mapping, const FrontEnd& fe, const SourceSpec& source,
                       double target_d, const Tolerances& tol, int scan_per_sigma) {
    fe.validate();
    source.validate();
    if (!(target_d > 0)) throw std::invalid_argument("dop_table: D must be > 0");
    const int m = fe.outcome_count();
    const double sv = source.sigma_v;
    const double half_width = std::sqrt(target_d);
    const double scan_step = sv / scan_per_sigma;

    DecoderTable table;
    table.criterion = Criterion::dop;
    table.target_d = target_d;
    table.v_hat = Eigen::ArrayXd::Zero(m);
    for (int j = 0; j < m; ++j) {
        const WindowMass wm =
            build_window_mass(mapping, fe, source, j, half_width, 4 * scan_per_sigma);
        double best_t = 0.0, best_w = -1.0;
        const int half_count = static_cast<int>(std::lround(4.0 * sv / scan_step));
        for (int k = -half_count; k <= half_count; ++k) {
            const double t = k * scan_step;
            const double w = wm.window(t, half_width);
            if (w > best_w || (w == best_w && std::abs(t) < std::abs(best_t))) {
                best_w = w;
                best_t = t;
            }
        }
        const MinResult refined = golden_section_min(
            [&](double t) { return -wm.window(t, half_width); }, best_t - scan_step,
            best_t + scan_step, tol);
        table.v_hat[j] = -refined.min >= best_w ? refined.argmin : best_t;
    }
    return table;
}

EqualNoiseCollapse collapse_equal_noise(const DecoderTable& table, int n_branches, double tol) {
    const int m = 1 << n_branches;
    if (table.v_hat.size() != m)
        throw std::invalid_argument("collapse_equal_noise: table size does not match 2^N");
    EqualNoiseCollapse report;
    report.effective_points = Eigen::ArrayXd::Zero(n_branches + 1);
    Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(n_branches + 1);
    for (int j = 0; j < m; ++j) {
        const int pc = outcome_popcount(j, n_branches);
        report.effective_points[pc] += table.v_hat[j];
        counts[pc] += 1;
    }
    report.effective_points /= counts;
    report.max_deviation = 0;
    for (int j = 0; j < m; ++j) {
        const int pc = outcome_popcount(j, n_branches);
        report.max_deviation =
            std::max(report.max_deviation, std::abs(table.v_hat[j] - report.effective_points[pc]));
    }
    report.holds = report.max_deviation <= tol;
    return report;
}

}  // namespace qjscc

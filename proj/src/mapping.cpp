#include "qjscc/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qjscc {

double GridMapping::operator()(double v) const {
    const Eigen::Index n = v_grid.size();
    if (v <= v_grid[0]) return f_values[0];
    if (v >= v_grid[n - 1]) return f_values[n - 1];
    const double* begin = v_grid.data();
    const Eigen::Index i = std::upper_bound(begin, begin + n, v) - begin;  // v in [grid[i-1], grid[i])
    const double t = (v - v_grid[i - 1]) / (v_grid[i] - v_grid[i - 1]);
    return f_values[i - 1] + t * (f_values[i] - f_values[i - 1]);
}

void GridMapping::validate() const {
    if (v_grid.size() < 2 || v_grid.size() != f_values.size())
        throw std::invalid_argument("GridMapping: grid and values must align, size >= 2");
    for (Eigen::Index i = 1; i < v_grid.size(); ++i)
        if (!(v_grid[i - 1] < v_grid[i]))
            throw std::invalid_argument("GridMapping: grid must be strictly ascending");
    if (!f_values.isFinite().all())
        throw std::invalid_argument("GridMapping: non-finite mapping value");
}

double PiecewiseConstantMapping::operator()(double v) const {
    const double* begin = breakpoints.data();
    const Eigen::Index i = std::upper_bound(begin, begin + breakpoints.size(), v) - begin;
    return values[i];
}

void PiecewiseConstantMapping::validate() const {
    if (values.size() != breakpoints.size() + 1)
        throw std::invalid_argument("PiecewiseConstantMapping: need |values| = |breakpoints| + 1");
    for (Eigen::Index i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw std::invalid_argument("PiecewiseConstantMapping: breakpoints must ascend");
}

double evaluate(const Mapping& m, double v) {
    return std::visit([v](const auto& repr) { return repr(v); }, m);
}

std::vector<double> knots(const Mapping& m) {
    return std::visit(
        [](const auto& repr) {
            using T = std::decay_t<decltype(repr)>;
            if constexpr (std::is_same_v<T, GridMapping>) {
                return std::vector<double>(repr.v_grid.data(), repr.v_grid.data() + repr.v_grid.size());
            } else {
                return std::vector<double>(repr.breakpoints.data(),
                                           repr.breakpoints.data() + repr.breakpoints.size());
            }
        },
        m);
}

double measure_power(const Mapping& m, const SourceSpec& source, const Tolerances& tol) {
    source.validate();
    if (const auto* pcm = std::get_if<PiecewiseConstantMapping>(&m)) {
        // sum of value^2 * Pr(V in cell), cells bounded by breakpoints
        double power = 0;
        const Eigen::Index mcount = pcm->breakpoints.size();
        for (Eigen::Index i = 0; i <= mcount; ++i) {
            const double lo = (i == 0) ? -std::numeric_limits<double>::infinity()
                                       : pcm->breakpoints[i - 1];
            const double hi = (i == mcount) ? std::numeric_limits<double>::infinity()
                                            : pcm->breakpoints[i];
            const double mass = detail::q_raw(lo / source.sigma_v) - detail::q_raw(hi / source.sigma_v);
            power += pcm->values[i] * pcm->values[i] * mass;
        }
        return power;
    }
    const auto splits = knots(m);
    return gaussian_expectation(
        [&](double v) {
            const double f = evaluate(m, v);
            return f * f;
        },
        source.sigma_v, tol, splits);
}

Eigen::ArrayXd default_grid(const SourceSpec& source, int points, double half_width_sigmas) {
    source.validate();
    if (points < 3 || points % 2 == 0)
        throw std::invalid_argument("default_grid: need an odd point count >= 3");
    const double w = half_width_sigmas * source.sigma_v;
    const int half = (points - 1) / 2;
    const double h = w / half;
    Eigen::ArrayXd grid(points);
    for (int i = 0; i < points; ++i) grid[i] = (i - half) * h;  // exactly symmetric, 0 at center
    return grid;
}

GridMapping make_grid_mapping(Eigen::ArrayXd v_grid, Eigen::ArrayXd f_values,
                              const SourceSpec& source, const Tolerances& tol) {
    GridMapping gm{std::move(v_grid), std::move(f_values), 0.0};
    gm.validate();
    gm.mean_power = measure_power(Mapping{gm}, source, tol);
    return gm;
}

}  // namespace qjscc

#pragma once

#include <Eigen/Core>
#include <variant>
#include <vector>

#include "qjscc/math.hpp"
#include "qjscc/model.hpp"

namespace qjscc {

/// Encoder mapping discretized on a source grid. Between grid points the
/// mapping is linear; outside the grid it saturates at the boundary value.
struct GridMapping {
    Eigen::ArrayXd v_grid;    ///< strictly ascending source points
    Eigen::ArrayXd f_values;  ///< channel input f(v) per grid point
    double mean_power = 0.0;  ///< E[f(V)^2] of the interpolant, by quadrature

    double operator()(double v) const;
    void validate() const;
};

/// Exactly-represented step mapping: value[i] on [breakpoints[i-1], breakpoints[i]).
struct PiecewiseConstantMapping {
    Eigen::ArrayXd breakpoints;  ///< strictly ascending, size m
    Eigen::ArrayXd values;       ///< size m + 1

    double operator()(double v) const;
    void validate() const;
};

using Mapping = std::variant<GridMapping, PiecewiseConstantMapping>;

double evaluate(const Mapping& m, double v);

/// Points where the mapping is non-smooth; used to seed quadrature panels.
std::vector<double> knots(const Mapping& m);

/// E[f(V)^2]. Quadrature for grid mappings; exact Gaussian cell masses for
/// step mappings.
double measure_power(const Mapping& m, const SourceSpec& source, const Tolerances& tol = {});

/// Uniform symmetric grid of `points` nodes on [-half_width_sigmas, +half_width_sigmas] * sigma_v.
Eigen::ArrayXd default_grid(const SourceSpec& source, int points = 2001,
                            double half_width_sigmas = 6.0);

/// Builds a GridMapping and fills in its quadrature mean power.
GridMapping make_grid_mapping(Eigen::ArrayXd v_grid, Eigen::ArrayXd f_values,
                              const SourceSpec& source, const Tolerances& tol = {});

}  // namespace qjscc

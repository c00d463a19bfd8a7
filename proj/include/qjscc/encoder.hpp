#pragma once

#include <functional>

#include "qjscc/mapping.hpp"

namespace qjscc {

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegeneratePowerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimal one-bit MSE encoder: per grid point, f(v) is the same-sign root of
/// f exp(f^2 / (2 sigma_w^2)) = v / (sqrt(2 pi) sigma_w lambda). The root is
/// solved on |v| and the sign copied, which keeps the mapping exactly odd and
/// strictly increasing.
GridMapping prop1_encoder(double lambda, const SourceSpec& source, double sigma_w,
                          const Eigen::ArrayXd& v_grid, const Tolerances& tol = {});

struct CalibratedDesign {
    double lambda = 0;
    GridMapping mapping;
};

/// Core power-calibration driver: bisection on log(lambda) against any
/// designer whose power is monotone non-increasing in lambda, with an
/// accelerating bracket expansion from lambda = 1.
double calibrate_lambda_generic(const std::function<double(double)>& power_of_lambda,
                                double target_power, double power_rel_tol = 1e-6);

/// Bisection on log(lambda) until |mean_power - target| / target <= rel_tol.
/// The designer must yield power monotone non-increasing in lambda; this is
/// checked on the final bracket.
CalibratedDesign calibrate_lambda(const std::function<GridMapping(double)>& designer,
                                  double target_power, const Tolerances& tol = {},
                                  double power_rel_tol = 1e-6);

/// Linear encoder f(v) = sqrt(P / sigma_v^2) v sampled on the grid.
/// mean_power is analytically P apart from grid truncation beyond the last node.
GridMapping linear_encoder(double power, const SourceSpec& source,
                           const Eigen::ArrayXd& v_grid, const Tolerances& tol = {});

struct PamDesign {
    PiecewiseConstantMapping mapping;  ///< values are the constellation points
    double amplitude = 0;              ///< A in x_(l) = A (2l - 1 - M)
};

/// Digital M-level transmission: source cells bounded by the given thresholds
/// are mapped onto the constellation {A (2l - 1 - M)} with A set so that
/// E[X^2] = power exactly.
PamDesign pam_encoder(int levels, const Eigen::ArrayXd& source_thresholds, double power,
                      const SourceSpec& source);

/// One-bit DOP-optimal design: ternary mapping {-u, 0, +u} with u from
/// u exp(u^2/(2 sigma_w^2)) = 1 / (2 sqrt(2 pi) sigma_w lambda), reconstruction
/// points +-(sqrt(D) - a*), and a* minimizing the closed-form Lagrangian over
/// [0, sqrt(D)].
struct DopDesign {
    PiecewiseConstantMapping mapping;
    double v_hat1 = 0;   ///< reconstruction for the non-negative ADC output
    double a_star = 0;
    double u = 0;
    double target_d = 0;
    double lambda = 0;

    Eigen::ArrayXd decoder_values() const;  ///< indexed by outcome (cell) order
};

DopDesign dop_onebit_design(double lambda, double target_d, const SourceSpec& source,
                            double sigma_w, const Tolerances& tol = {});

}  // namespace qjscc

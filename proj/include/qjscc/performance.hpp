#pragma once

#include <functional>

#include "qjscc/decoder.hpp"

namespace qjscc {

struct EvalResult {
    double value = 0;   ///< mean distortion or outage probability
    double power = 0;   ///< E[f(V)^2]
    double snr = 0;
    Criterion criterion = Criterion::mse;
    double target_d = 0;
};

/// Average distortion E_v[sum_j Pr(j | v) (v - v_hat_j)^2] by quadrature.
EvalResult mse_eval(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                    const SourceSpec& source, const Tolerances& tol = {});

/// MSE through the MMSE orthogonality identity sigma_v^2 - E[V V_hat]; valid
/// when the table is the exact conditional-mean table for this mapping.
double mse_via_orthogonality(const Mapping& mapping, const DecoderTable& table,
                             const FrontEnd& fe, const SourceSpec& source,
                             const Tolerances& tol = {});

/// Outage probability eps(D) = 1 - E_v[sum over outcomes whose reconstruction
/// lies within sqrt(D) of v of Pr(j | v)], with quadrature panels split at the
/// coverage boundaries v_hat_j +- sqrt(D).
EvalResult dop_eval(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                    const SourceSpec& source, double target_d, const Tolerances& tol = {});

/// Probability that no reconstruction point lies within sqrt(D) of the source:
/// the noise-free floor of eps(D) for a given point layout.
double source_outage(const Eigen::ArrayXd& points, double target_d, const SourceSpec& source);

/// Closed-form MSE of linear transmission through a one-bit front end:
/// sigma_v^2 (1 - (2/pi) gamma / (gamma + 1)).
double mse_linear_closed(double gamma, double sigma_v);

/// Closed-form MSE of BPSK through a one-bit front end:
/// sigma_v^2 (1 - (2/pi) (1 - 2 Q(sqrt(gamma)))^2).
double mse_bpsk_closed(double gamma, double sigma_v);

/// MSE of symmetric M-level digital transmission with the given source
/// thresholds (Gaussian cell moments in closed form).
double mse_pam_closed(int levels, const Eigen::ArrayXd& source_thresholds, double gamma,
                      double sigma_v);

/// Ternary digital transmission with the zero-symbol half-width c optimized
/// by line search.
struct Pam3Result {
    double mse = 0;
    double threshold = 0;
};
Pam3Result mse_pam3_optimized(double gamma, double sigma_v, const Tolerances& tol = {});

/// One-bit DOP Lagrangian in closed form at interval parameter a and plateau
/// height u; equals dop_eval(design) + lambda * power at the design point.
double dop_onebit_closed(double a, double u, double target_d, const SourceSpec& source,
                         double sigma_w, double lambda);

/// Unquantized-front-end limit sigma_v^2 / (1 + gamma).
double shannon_opta(double gamma, double sigma_v);

/// Central-difference slope of a distortion curve at gamma -> 0, evaluated at
/// gamma = 1e-4.
double low_snr_slope(const std::function<double(double)>& curve);

}  // namespace qjscc

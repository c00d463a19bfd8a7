#pragma once

#include <optional>
#include <vector>

#include "qjscc/decoder.hpp"

namespace qjscc {

/// Gradient-descent settings for the grid-discretized encoder mapping.
struct DescentConfig {
    double step_mu = 0.0;      ///< initial step; <= 0 selects 0.1 * min sigma_w^2
    int max_iters = 500;
    double grad_tol = 1e-6;    ///< sup-norm stopping threshold on the gradient
    double backtracking = 0.5; ///< step shrink factor on a rejected move
};

/// Lagrangian integrand F(v, f) with the decoder fixed: the distortion term
/// of the chosen criterion plus lambda f^2. The gradient fields below are its
/// pointwise derivative in f.
double lagrangian_integrand(double v, double f, const DecoderTable& table, const FrontEnd& fe,
                            double lambda, Criterion criterion, double target_d);

/// Discretized Lagrangian: trapezoid sum of the Gaussian-weighted integrand
/// over the grid. This is the objective the descent monitors.
double grid_lagrangian(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                       const DecoderTable& table, const FrontEnd& fe, const SourceSpec& source,
                       double lambda, Criterion criterion, double target_d);

/// MSE gradient for a single K-level observation:
/// 2 lambda f - (1/sqrt(2 pi) sigma_w) sum_j vh_j (2v - vh_j) xi_j(f), with
/// xi_j the difference of cell-edge Gaussians (infinite edges contribute 0).
Eigen::ArrayXd grad_mse_klevel(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                               const DecoderTable& table, const QuantizerSpec& quantizer,
                               double sigma_w, double lambda);

/// MSE gradient for N one-bit observations, via the per-outcome derivative
/// Theta(N, f, j) of the joint outcome probability.
Eigen::ArrayXd grad_mse_multibit(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                 const DecoderTable& table, const ChannelSpec& channel,
                                 double lambda);

/// DOP gradient for a single K-level observation: 2 lambda f minus the
/// xi-sum over outcomes whose reconstruction point covers v. The sum
/// telescopes to zero when v is covered by none or by all points.
Eigen::ArrayXd grad_dop_klevel(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                               const DecoderTable& table, const QuantizerSpec& quantizer,
                               double sigma_w, double lambda, double target_d);

/// DOP gradient for N one-bit observations.
Eigen::ArrayXd grad_dop_multibit(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                 const DecoderTable& table, const ChannelSpec& channel,
                                 double lambda, double target_d);

/// Criterion/front-end dispatch over the four gradient forms.
Eigen::ArrayXd lagrangian_gradient(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                   const DecoderTable& table, const FrontEnd& fe, double lambda,
                                   Criterion criterion, double target_d);

struct DescentTraceRow {
    int iter = 0;
    double lagrangian = 0;
    double grad_sup = 0;
};

struct DescentResult {
    Eigen::ArrayXd f;
    std::vector<DescentTraceRow> trace;
    bool converged = false;
    bool stalled = false;
};

/// Fixed-decoder gradient descent f <- f - mu grad L with backtracking; the
/// discretized Lagrangian never increases across accepted steps. Not
/// guaranteed to reach a global optimum.
DescentResult descend(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f0,
                      const DecoderTable& table, const FrontEnd& fe, const SourceSpec& source,
                      double lambda, Criterion criterion, double target_d,
                      const DescentConfig& cfg);

struct AlternateResult {
    GridMapping mapping;
    DecoderTable table;
    double lagrangian = 0;
    bool converged = false;
    int rounds = 0;
    std::vector<DescentTraceRow> trace;  ///< concatenated descent traces
};

/// Alternating optimization: descend the encoder against a fixed decoder,
/// rebuild the decoder (conditional means or window maximizers), repeat until
/// the Lagrangian change drops below round_tol or the round cap is hit.
/// When init_table is absent the decoder is first rebuilt from the mapping.
AlternateResult alternate(const GridMapping& init, const FrontEnd& fe, const SourceSpec& source,
                          double lambda, Criterion criterion, double target_d,
                          const DescentConfig& cfg, int max_rounds = 50,
                          double round_tol = 1e-8,
                          const std::optional<DecoderTable>& init_table = std::nullopt);

struct NcrPoint {
    double lambda = 0;
    GridMapping mapping;
    DecoderTable table;
    bool converged = false;
};

/// Noise-channel-relaxation continuation over a strictly descending lambda
/// schedule: the first solve starts from the all-zero mapping (with a spread
/// decoder seed so the alternation can leave the degenerate fixed point),
/// and each later solve warm-starts from the previous solution.
std::vector<NcrPoint> ncr_run(const std::vector<double>& lambda_schedule, const FrontEnd& fe,
                              const SourceSpec& source, Criterion criterion, double target_d,
                              const DescentConfig& cfg, const Eigen::ArrayXd& v_grid);

}  // namespace qjscc

#pragma once

#include "qjscc/mapping.hpp"

namespace qjscc {

enum class Criterion { mse, dop };

/// Reconstruction values indexed by front-end outcome (cell index for a
/// single observation, joint bit-pattern index for N one-bit branches).
struct DecoderTable {
    Eigen::ArrayXd v_hat;
    Criterion criterion = Criterion::mse;
    double target_d = 0.0;  ///< meaningful for DOP tables
};

/// Pr(outcome | channel input x). Single branch: Q((z_(j-1) - x)/sigma_w) -
/// Q((z_(j) - x)/sigma_w). N one-bit branches: prod_i Q((-1)^(b_i + 1) x / sigma_w_i),
/// with b the outcome's bit pattern (bit 1 = negative branch sample).
double outcome_prob_given_input(double x, int outcome, const FrontEnd& fe);

/// Pr(outcome | V = v) under mapping f.
double transition_prob(double v, int outcome, const Mapping& mapping, const FrontEnd& fe);

/// MMSE reconstruction per outcome: v_hat(j) = E[V Pr(j | V)] / E[Pr(j | V)].
/// Outcomes whose probability mass falls below 1e-14 reconstruct to 0.
DecoderTable mmse_table(const Mapping& mapping, const FrontEnd& fe, const SourceSpec& source,
                        const Tolerances& tol = {});

/// DOP-optimal reconstruction per outcome: the window-probability maximizer
/// argmax_t int_{t - sqrt(D)}^{t + sqrt(D)} phi(v / sigma_v) Pr(j | v) dv,
/// located by a dense scan over t in [-4 sigma_v, 4 sigma_v] (step
/// sigma_v / scan_per_sigma) refined by golden section in the best cell.
/// Scan ties break toward the smallest |t|.
DecoderTable dop_table(const Mapping& mapping, const FrontEnd& fe, const SourceSpec& source,
                       double target_d, const Tolerances& tol = {}, int scan_per_sigma = 400);

/// Remark-style symmetry check: with equal branch noise, reconstruction
/// values may depend on the outcome only through its popcount, leaving
/// N + 1 effective points.
struct EqualNoiseCollapse {
    bool holds = false;
    double max_deviation = 0.0;
    Eigen::ArrayXd effective_points;  ///< indexed by popcount 0..N
};

EqualNoiseCollapse collapse_equal_noise(const DecoderTable& table, int n_branches,
                                        double tol = 1e-8);

}  // namespace qjscc

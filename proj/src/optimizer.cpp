#include "qjscc/optimizer.hpp"

#include <cmath>
#include <limits>

namespace qjscc {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double edge_gauss(double edge, double f, double inv2s2) {
    if (!std::isfinite(edge)) return 0.0;
    const double d = edge - f;
    return std::exp(-d * d * inv2s2);
}

/// xi_j(f) = exp(-(z_(j-1)-f)^2 / 2 sw^2) - exp(-(z_(j)-f)^2 / 2 sw^2)
double xi_cell(const QuantizerSpec& q, int cell, double f, double inv2s2) {
    return edge_gauss(q.lower_edge(cell), f, inv2s2) - edge_gauss(q.upper_edge(cell), f, inv2s2);
}

/// Theta(N, f, j) = d Pr(outcome j | f) / d f for one-bit branches.
double theta_outcome(const ChannelSpec& ch, const std::vector<int>& bits, double f) {
    const int n = static_cast<int>(bits.size());
    double theta = 0;
    for (int k = 0; k < n; ++k) {
        const double swk = ch.noise_sigmas[k];
        double term = (bits[k] ? -1.0 : 1.0) * kInvSqrt2Pi *
                      std::exp(-0.5 * f * f / (swk * swk)) / swk;
        for (int l = 0; l < n; ++l) {
            if (l == k) continue;
            const double swl = ch.noise_sigmas[l];
            term *= bits[l] ? detail::q_raw(f / swl) : detail::q_raw(-f / swl);
        }
        theta += term;
    }
    return theta;
}

bool covers(const DecoderTable& table, int j, double v, double target_d) {
    const double d = v - table.v_hat[j];
    return d * d < target_d;
}

}  // namespace

double lagrangian_integrand(double v, double f, const DecoderTable& table, const FrontEnd& fe,
                            double lambda, Criterion criterion, double target_d) {
    const int m = fe.outcome_count();
    if (criterion == Criterion::mse) {
        double acc = 0;
        for (int j = 0; j < m; ++j) {
            const double d = v - table.v_hat[j];
            acc += outcome_prob_given_input(f, j, fe) * d * d;
        }
        return acc + lambda * f * f;
    }
    double covered = 0;
    for (int j = 0; j < m; ++j)
        if (covers(table, j, v, target_d)) covered += outcome_prob_given_input(f, j, fe);
    return 1.0 - covered + lambda * f * f;
}

double grid_lagrangian(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                       const DecoderTable& table, const FrontEnd& fe, const SourceSpec& source,
                       double lambda, Criterion criterion, double target_d) {
    const Eigen::Index n = v_grid.size();
    const double inv_sv = 1.0 / source.sigma_v;
    double acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = (i == 0)           ? 0.5 * (v_grid[1] - v_grid[0])
                         : (i == n - 1)     ? 0.5 * (v_grid[n - 1] - v_grid[n - 2])
                                            : 0.5 * (v_grid[i + 1] - v_grid[i - 1]);
        const double density =
            kInvSqrt2Pi * inv_sv * std::exp(-0.5 * v_grid[i] * v_grid[i] * inv_sv * inv_sv);
        acc += w * density *
               lagrangian_integrand(v_grid[i], f[i], table, fe, lambda, criterion, target_d);
    }
    return acc;
}

Eigen::ArrayXd grad_mse_klevel(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                               const DecoderTable& table, const QuantizerSpec& quantizer,
                               double sigma_w, double lambda) {
    const int m = quantizer.levels();
    const double inv2s2 = 0.5 / (sigma_w * sigma_w);
    const double scale = kInvSqrt2Pi / sigma_w;
    Eigen::ArrayXd g(v_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        double sum = 0;
        for (int j = 0; j < m; ++j) {
            const double vh = table.v_hat[j];
            sum += vh * (2.0 * v_grid[i] - vh) * xi_cell(quantizer, j, f[i], inv2s2);
        }
        g[i] = 2.0 * lambda * f[i] - scale * sum;
    }
    return g;
}

Eigen::ArrayXd grad_mse_multibit(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                 const DecoderTable& table, const ChannelSpec& channel,
                                 double lambda) {
    const int n = channel.branches();
    const int m = 1 << n;
    std::vector<std::vector<int>> bits(m);
    for (int j = 0; j < m; ++j) bits[j] = outcome_bits(j, n).bits;
    Eigen::ArrayXd g(v_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        double sum = 0;
        for (int j = 0; j < m; ++j) {
            const double vh = table.v_hat[j];
            if (vh == 0) continue;
            sum += vh * theta_outcome(channel, bits[j], f[i]) * (2.0 * v_grid[i] - vh);
        }
        g[i] = 2.0 * lambda * f[i] - sum;
    }
    return g;
}

Eigen::ArrayXd grad_dop_klevel(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                               const DecoderTable& table, const QuantizerSpec& quantizer,
                               double sigma_w, double lambda, double target_d) {
    const int m = quantizer.levels();
    const double inv2s2 = 0.5 / (sigma_w * sigma_w);
    const double scale = kInvSqrt2Pi / sigma_w;
    Eigen::ArrayXd g(v_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        double sum = 0;
        for (int j = 0; j < m; ++j)
            if (covers(table, j, v_grid[i], target_d)) sum += xi_cell(quantizer, j, f[i], inv2s2);
        g[i] = 2.0 * lambda * f[i] - scale * sum;
    }
    return g;
}

Eigen::ArrayXd grad_dop_multibit(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                 const DecoderTable& table, const ChannelSpec& channel,
                                 double lambda, double target_d) {
    const int n = channel.branches();
    const int m = 1 << n;
    std::vector<std::vector<int>> bits(m);
    for (int j = 0; j < m; ++j) bits[j] = outcome_bits(j, n).bits;
    Eigen::ArrayXd g(v_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        double sum = 0;
        for (int j = 0; j < m; ++j)
            if (covers(table, j, v_grid[i], target_d))
                sum += theta_outcome(channel, bits[j], f[i]);
        g[i] = 2.0 * lambda * f[i] - sum;
    }
    return g;
}

Eigen::ArrayXd lagrangian_gradient(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f,
                                   const DecoderTable& table, const FrontEnd& fe, double lambda,
                                   Criterion criterion, double target_d) {
    if (fe.branches() == 1) {
        const double sw = fe.channel.noise_sigmas[0];
        return criterion == Criterion::mse
                   ? grad_mse_klevel(v_grid, f, table, fe.quantizer, sw, lambda)
                   : grad_dop_klevel(v_grid, f, table, fe.quantizer, sw, lambda, target_d);
    }
    return criterion == Criterion::mse
               ? grad_mse_multibit(v_grid, f, table, fe.channel, lambda)
               : grad_dop_multibit(v_grid, f, table, fe.channel, lambda, target_d);
}

DescentResult descend(const Eigen::ArrayXd& v_grid, const Eigen::ArrayXd& f0,
                      const DecoderTable& table, const FrontEnd& fe, const SourceSpec& source,
                      double lambda, Criterion criterion, double target_d,
                      const DescentConfig& cfg) {
    const double mu0 =
        cfg.step_mu > 0 ? cfg.step_mu : 0.1 * fe.channel.noise_sigmas.square().minCoeff();
    const double mu_floor = 1e-18 * mu0;

    DescentResult res;
    res.f = f0;
    double lag = grid_lagrangian(v_grid, res.f, table, fe, source, lambda, criterion, target_d);
    Eigen::ArrayXd grad =
        lagrangian_gradient(v_grid, res.f, table, fe, lambda, criterion, target_d);
    res.trace.push_back({0, lag, grad.abs().maxCoeff()});

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        if (res.trace.back().grad_sup < cfg.grad_tol) {
            res.converged = true;
            break;
        }
        double mu = mu0;
        Eigen::ArrayXd f_next;
        double lag_next = 0;
        bool accepted = false;
        while (mu >= mu_floor) {
            f_next = res.f - mu * grad;
            lag_next =
                grid_lagrangian(v_grid, f_next, table, fe, source, lambda, criterion, target_d);
            if (lag_next <= lag) {
                accepted = true;
                break;
            }
            mu *= cfg.backtracking;
        }
        if (!accepted) {
            res.stalled = true;  // keep the best iterate seen so far
            break;
        }
        res.f = std::move(f_next);
        lag = lag_next;
        grad = lagrangian_gradient(v_grid, res.f, table, fe, lambda, criterion, target_d);
        res.trace.push_back({iter, lag, grad.abs().maxCoeff()});
    }
    if (!res.converged && !res.stalled)
        res.converged = res.trace.back().grad_sup < cfg.grad_tol;
    return res;
}

namespace {

DecoderTable rebuild_table(const GridMapping& mapping, const FrontEnd& fe,
                           const SourceSpec& source, Criterion criterion, double target_d) {
    const Mapping m{mapping};
    return criterion == Criterion::mse ? mmse_table(m, fe, source)
                                       : dop_table(m, fe, source, target_d);
}

}  // namespace

AlternateResult alternate(const GridMapping& init, const FrontEnd& fe, const SourceSpec& source,
                          double lambda, Criterion criterion, double target_d,
                          const DescentConfig& cfg, int max_rounds, double round_tol,
                          const std::optional<DecoderTable>& init_table) {
    fe.validate();
    source.validate();

    AlternateResult res;
    res.mapping = init;
    res.table = init_table ? *init_table
                           : rebuild_table(res.mapping, fe, source, criterion, target_d);
    double lag_prev = std::numeric_limits<double>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
        DescentResult d = descend(res.mapping.v_grid, res.mapping.f_values, res.table, fe, source,
                                  lambda, criterion, target_d, cfg);
        res.mapping.f_values = std::move(d.f);
        for (auto& row : d.trace) res.trace.push_back(row);
        res.table = rebuild_table(res.mapping, fe, source, criterion, target_d);
        res.lagrangian = grid_lagrangian(res.mapping.v_grid, res.mapping.f_values, res.table, fe,
                                         source, lambda, criterion, target_d);
        res.rounds = round + 1;
        if (std::abs(lag_prev - res.lagrangian) < round_tol) {
            res.converged = true;
            break;
        }
        lag_prev = res.lagrangian;
    }
    res.mapping =
        make_grid_mapping(res.mapping.v_grid, res.mapping.f_values, source);
    return res;
}

namespace {

/// Symmetric ladder of reconstruction seeds so the first NCR solve can leave
/// the all-zero fixed point.
DecoderTable spread_table(int m, Criterion criterion, double target_d, const SourceSpec& source) {
    DecoderTable t;
    t.criterion = criterion;
    t.target_d = target_d;
    t.v_hat = Eigen::ArrayXd(m);
    const double unit = criterion == Criterion::dop
                            ? std::sqrt(target_d)
                            : source.sigma_v * 0.7978845608028654 * 2.0 / m;
    for (int j = 0; j < m; ++j) t.v_hat[j] = (2.0 * j - (m - 1)) * unit;
    return t;
}

}  // namespace

std::vector<NcrPoint> ncr_run(const std::vector<double>& lambda_schedule, const FrontEnd& fe,
                              const SourceSpec& source, Criterion criterion, double target_d,
                              const DescentConfig& cfg, const Eigen::ArrayXd& v_grid) {
    if (lambda_schedule.empty()) throw std::invalid_argument("ncr_run: empty schedule");
    for (size_t i = 1; i < lambda_schedule.size(); ++i)
        if (!(lambda_schedule[i] < lambda_schedule[i - 1]))
            throw std::invalid_argument("ncr_run: schedule must be strictly descending");

    const int m = fe.outcome_count();
    GridMapping mapping =
        make_grid_mapping(v_grid, Eigen::ArrayXd::Zero(v_grid.size()), source);
    DecoderTable table = spread_table(m, criterion, target_d, source);

    std::vector<NcrPoint> points;
    points.reserve(lambda_schedule.size());
    for (double lambda : lambda_schedule) {
        if (table.v_hat.abs().maxCoeff() < 1e-8 * source.sigma_v)
            table = spread_table(m, criterion, target_d, source);  // escape a collapsed seed
        AlternateResult r = alternate(mapping, fe, source, lambda, criterion, target_d, cfg, 50,
                                      1e-8, table);
        mapping = r.mapping;
        table = r.table;
        points.push_back({lambda, mapping, table, r.converged});
    }
    return points;
}

}  // namespace qjscc

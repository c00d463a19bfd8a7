#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "qjscc/encoder.hpp"
#include "qjscc/optimizer.hpp"
#include "qjscc/performance.hpp"

using namespace qjscc;

namespace {
const Tolerances tol;
const SourceSpec src{1.0};

Eigen::ArrayXd noisy_tanh(const Eigen::ArrayXd& grid, double amp, double slope,
                          double jitter, oracle::Rng& rng) {
    Eigen::ArrayXd f(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        f[i] = amp * std::tanh(slope * grid[i]) + jitter * rng.uniform(-1, 1);
    return f;
}

/// Central finite difference of the fixed-decoder Lagrangian integrand in f.
double fd_gradient(double v, double f, const DecoderTable& t, const FrontEnd& fe, double lambda,
                   Criterion crit, double d, double h = 1e-5) {
    return (lagrangian_integrand(v, f + h, t, fe, lambda, crit, d) -
            lagrangian_integrand(v, f - h, t, fe, lambda, crit, d)) /
           (2 * h);
}

double worst_fd_error(const Eigen::ArrayXd& grid, const Eigen::ArrayXd& f,
                      const Eigen::ArrayXd& grad, const DecoderTable& t, const FrontEnd& fe,
                      double lambda, Criterion crit, double d, oracle::Rng& rng) {
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        const int i = 50 + rng.index(static_cast<int>(grid.size()) - 100);
        const double fd = fd_gradient(grid[i], f[i], t, fe, lambda, crit, d);
        worst = std::max(worst, std::abs(fd - grad[i]) /
                                    std::max({std::abs(grad[i]), std::abs(fd), 1e-8}));
    }
    return worst;
}
}  // namespace

TEST_CASE("MSE K-level gradient matches finite differences") {
    oracle::Rng rng(11);
    const auto grid = default_grid(src, 1001);
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.8)};
    const Eigen::ArrayXd f = noisy_tanh(grid, 1.3, 1.0, 0.2, rng);
    const Mapping m{GridMapping{grid, f, 0.0}};
    const DecoderTable t = mmse_table(m, fe, src, tol);
    const double lambda = 0.13;
    const Eigen::ArrayXd g = grad_mse_klevel(grid, f, t, fe.quantizer, 1.0, lambda);
    CHECK(worst_fd_error(grid, f, g, t, fe, lambda, Criterion::mse, 0, rng) < 1e-4);
}

TEST_CASE("MSE multi-branch gradient matches finite differences") {
    oracle::Rng rng(12);
    const auto grid = default_grid(src, 1001);
    FrontEnd fe{ChannelSpec::uniform(2, 1.0), one_bit_quantizer()};
    const Eigen::ArrayXd f = noisy_tanh(grid, 0.9, 1.7, 0.15, rng);
    const Mapping m{GridMapping{grid, f, 0.0}};
    const DecoderTable t = mmse_table(m, fe, src, tol);
    const double lambda = 0.2;
    const Eigen::ArrayXd g = grad_mse_multibit(grid, f, t, fe.channel, lambda);
    CHECK(worst_fd_error(grid, f, g, t, fe, lambda, Criterion::mse, 0, rng) < 1e-4);
}

TEST_CASE("DOP gradients match finite differences") {
    oracle::Rng rng(13);
    const auto grid = default_grid(src, 1001);
    const double d = 0.16;

    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.9)};
    const Eigen::ArrayXd f = noisy_tanh(grid, 1.1, 2.0, 0.2, rng);
    const Mapping m{GridMapping{grid, f, 0.0}};
    const DecoderTable t = dop_table(m, fe, src, d, tol);
    const double lambda = 0.08;
    const Eigen::ArrayXd g = grad_dop_klevel(grid, f, t, fe.quantizer, 1.0, lambda, d);
    CHECK(worst_fd_error(grid, f, g, t, fe, lambda, Criterion::dop, d, rng) < 1e-3);

    FrontEnd fe2{ChannelSpec::uniform(2, 1.0), one_bit_quantizer()};
    const DecoderTable t2 = dop_table(m, fe2, src, d, tol);
    const Eigen::ArrayXd g2 = grad_dop_multibit(grid, f, t2, fe2.channel, lambda, d);
    CHECK(worst_fd_error(grid, f, g2, t2, fe2, lambda, Criterion::dop, d, rng) < 1e-3);
}

TEST_CASE("single-branch specializations coincide") {
    oracle::Rng rng(14);
    const auto grid = default_grid(src, 501);
    const Eigen::ArrayXd f = noisy_tanh(grid, 1.0, 1.2, 0.1, rng);
    const ChannelSpec ch = ChannelSpec::single(1.1);
    const QuantizerSpec q = one_bit_quantizer();

    DecoderTable t;
    t.v_hat = Eigen::ArrayXd(2);
    t.v_hat << -0.63, 0.63;
    const Eigen::ArrayXd a = grad_mse_klevel(grid, f, t, q, 1.1, 0.3);
    const Eigen::ArrayXd b = grad_mse_multibit(grid, f, t, ch, 0.3);
    CHECK((a - b).abs().maxCoeff() < 1e-13);

    t.criterion = Criterion::dop;
    t.target_d = 0.09;
    const Eigen::ArrayXd c = grad_dop_klevel(grid, f, t, q, 1.1, 0.3, 0.09);
    const Eigen::ArrayXd e = grad_dop_multibit(grid, f, t, ch, 0.3, 0.09);
    CHECK((c - e).abs().maxCoeff() < 1e-13);
}

TEST_CASE("gradient degenerate branches") {
    const auto grid = default_grid(src, 501);
    const Eigen::ArrayXd f = 0.8 * grid;
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.7)};

    // all-zero decoder: only the power pull survives
    DecoderTable zeros;
    zeros.v_hat = Eigen::ArrayXd::Zero(4);
    const Eigen::ArrayXd g = grad_mse_klevel(grid, f, zeros, fe.quantizer, 1.0, 0.4);
    CHECK((g - 2 * 0.4 * f).abs().maxCoeff() < 1e-14);

    // DOP with every point covering v (|V| = K): pure power pull again
    DecoderTable all;
    all.criterion = Criterion::dop;
    all.target_d = 100.0;
    all.v_hat = Eigen::ArrayXd::Zero(4);
    const Eigen::ArrayXd gd = grad_dop_klevel(grid, f, all, fe.quantizer, 1.0, 0.4, 100.0);
    CHECK((gd - 2 * 0.4 * f).abs().maxCoeff() < 1e-12);

    // and v far from every point (|V| = 0) behaves the same
    DecoderTable none;
    none.criterion = Criterion::dop;
    none.target_d = 1e-6;
    none.v_hat = Eigen::ArrayXd::Zero(4);
    const Eigen::ArrayXd gn = grad_dop_klevel(grid, f, none, fe.quantizer, 1.0, 0.4, 1e-6);
    Eigen::ArrayXd expected = 2 * 0.4 * f;
    double worst = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i]) > 0.01) worst = std::max(worst, std::abs(gn[i] - expected[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("odd configuration yields an odd gradient") {
    const auto grid = default_grid(src, 801);
    Eigen::ArrayXd f(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) f[i] = 1.2 * std::tanh(1.5 * grid[i]);
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.8)};
    const Mapping m{GridMapping{grid, f, 0.0}};
    const DecoderTable t = mmse_table(m, fe, src, tol);
    const Eigen::ArrayXd g = grad_mse_klevel(grid, f, t, fe.quantizer, 1.0, 0.2);
    const Eigen::Index n = grid.size();
    double worst = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(g[i] + g[n - 1 - i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("descent stays put at the prop1 stationary point") {
    const auto grid = default_grid(src);
    FrontEnd fe{ChannelSpec::single(1.0), one_bit_quantizer()};
    const CalibratedDesign cal = calibrate_lambda(
        [&](double l) { return prop1_encoder(l, src, 1.0, grid, tol); }, 1.0, tol);
    const Mapping m{cal.mapping};
    const DecoderTable t = mmse_table(m, fe, src, tol);
    // fixed-decoder Lagrangian carries lambda' = 2 v_hat(1) lambda
    const double lambda_fixed = 2.0 * t.v_hat[1] * cal.lambda;

    DescentConfig cfg;
    const DescentResult r = descend(grid, cal.mapping.f_values, t, fe, src, lambda_fixed,
                                    Criterion::mse, 0, cfg);
    CHECK(r.converged);
    CHECK((r.f - cal.mapping.f_values).abs().maxCoeff() < 1e-5);
    CHECK(r.trace.size() <= 3);
}

TEST_CASE("descent is monotone and reduces the Lagrangian from a linear start") {
    const auto grid = default_grid(src, 1001);
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 1.0)};
    const GridMapping init = linear_encoder(2.0, src, grid, tol);
    const Mapping m{init};
    const DecoderTable t = mmse_table(m, fe, src, tol);
    DescentConfig cfg;
    cfg.max_iters = 200;
    const DescentResult r =
        descend(grid, init.f_values, t, fe, src, 0.1, Criterion::mse, 0, cfg);
    REQUIRE(r.trace.size() >= 2);
    for (size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].lagrangian <= r.trace[i - 1].lagrangian + 1e-12);
    CHECK(r.trace.back().lagrangian < r.trace.front().lagrangian);
}

TEST_CASE("alternation at K = 2 reproduces the closed-form optimal design") {
    const auto grid = default_grid(src);
    FrontEnd fe{ChannelSpec::single(1.0), one_bit_quantizer()};
    const double power = 1.0;

    const CalibratedDesign prop = calibrate_lambda(
        [&](double l) { return prop1_encoder(l, src, 1.0, grid, tol); }, power, tol);
    const Mapping pm{prop.mapping};
    const DecoderTable pt = mmse_table(pm, fe, src, tol);
    const double d_prop = mse_eval(pm, pt, fe, src, tol).value;

    DescentConfig cfg;
    cfg.max_iters = 2000;
    const CalibratedDesign noe = calibrate_lambda(
        [&](double l) {
            const GridMapping init = linear_encoder(power, src, grid, tol);
            return alternate(init, fe, src, l, Criterion::mse, 0, cfg).mapping;
        },
        power, tol);
    const Mapping nm{noe.mapping};
    const DecoderTable nt = mmse_table(nm, fe, src, tol);
    const double d_noe = mse_eval(nm, nt, fe, src, tol).value;

    CHECK(std::abs(d_noe - d_prop) < 1e-4);

    // pointwise implicit-equation residual of the converged iterate, with the
    // lambda normalization mapped back to the closed-form convention
    const double lambda6 = noe.lambda / (2.0 * nt.v_hat[1]);
    constexpr double kSqrt2Pi = 2.5066282746310005024;
    double worst = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double f = noe.mapping.f_values[i];
        worst = std::max(worst, std::abs(f * std::exp(f * f / 2.0) * kSqrt2Pi * lambda6 -
                                         grid[i]));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("MMSE rebuilds never increase the distortion across rounds") {
    const auto grid = default_grid(src, 1001);
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.9)};
    GridMapping mapping = linear_encoder(3.0, src, grid, tol);
    DecoderTable table = mmse_table(Mapping{mapping}, fe, src, tol);
    DescentConfig cfg;
    cfg.max_iters = 120;
    double prev = mse_eval(Mapping{mapping}, table, fe, src, tol).value;
    for (int round = 0; round < 3; ++round) {
        const DescentResult r =
            descend(grid, mapping.f_values, table, fe, src, 0.05, Criterion::mse, 0, cfg);
        mapping.f_values = r.f;
        table = mmse_table(Mapping{mapping}, fe, src, tol);
        const double now = mse_eval(Mapping{mapping}, table, fe, src, tol).value;
        CHECK(now <= prev + 1e-9);
        prev = now;
    }
}

TEST_CASE("odd symmetry is preserved through alternation") {
    const auto grid = default_grid(src, 801);
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 0.8)};
    const GridMapping init = linear_encoder(1.5, src, grid, tol);
    DescentConfig cfg;
    cfg.max_iters = 300;
    const AlternateResult r = alternate(init, fe, src, 0.1, Criterion::mse, 0, cfg, 20);
    const Eigen::Index n = grid.size();
    double worst = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(r.mapping.f_values[i] + r.mapping.f_values[n - 1 - i]));
    CHECK(worst < 1e-8);
}

TEST_CASE("high-SNR K-level alternation produces a step-like mapping") {
    const auto grid = default_grid(src, 1001);
    const double power = 100.0;
    FrontEnd fe{ChannelSpec::single(1.0), uniform_midtread_quantizer(4, 9.0)};
    DescentConfig cfg;
    cfg.max_iters = 800;
    const CalibratedDesign noe = calibrate_lambda(
        [&](double l) {
            const GridMapping init = linear_encoder(power, src, grid, tol);
            return alternate(init, fe, src, l, Criterion::mse, 0, cfg).mapping;
        },
        power, tol);
    // values on |v| in [0.8, 3] sigma cluster near at most K plateau levels
    std::vector<double> plateaus;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i]) < 0.8 || std::abs(grid[i]) > 3.0) continue;
        const double f = noe.mapping.f_values[i];
        bool found = false;
        for (double p : plateaus)
            if (std::abs(p - f) < 0.15 * std::sqrt(power)) found = true;
        if (!found) plateaus.push_back(f);
    }
    CHECK(plateaus.size() <= 4);
    CHECK(plateaus.size() >= 2);
}

TEST_CASE("DOP alternation at one bit recovers the ternary closed form") {
    const auto grid = default_grid(src, 1001);
    const double d = 0.09;
    FrontEnd fe{ChannelSpec::single(1.0), one_bit_quantizer()};
    DescentConfig cfg;
    cfg.max_iters = 600;

    // large lambda: reconstruction points collapse near zero
    {
        const GridMapping zero = make_grid_mapping(grid, Eigen::ArrayXd::Zero(grid.size()), src, tol);
        const AlternateResult r = alternate(zero, fe, src, 1e4, Criterion::dop, d, cfg, 20);
        CHECK(r.table.v_hat.abs().maxCoeff() < 0.01);
    }

    // moderate lambda: plateau height matches the implicit-equation root
    {
        const double lambda = 0.05;
        const DopDesign closed = dop_onebit_design(lambda, d, src, 1.0, tol);
        const DecoderTable seed{closed.decoder_values(), Criterion::dop, d};
        const GridMapping zero = make_grid_mapping(grid, Eigen::ArrayXd::Zero(grid.size()), src, tol);
        const AlternateResult r = alternate(zero, fe, src, lambda, Criterion::dop, d, cfg, 30,
                                            1e-8, seed);
        const double plateau = r.mapping.f_values.abs().maxCoeff();
        CHECK(plateau == doctest::Approx(closed.u).epsilon(1e-3));
    }
}

TEST_CASE("NCR continuation walks the DOP frontier") {
    const auto grid = default_grid(src, 801);
    const double d = 0.09;
    FrontEnd fe{ChannelSpec::single(1.0), one_bit_quantizer()};
    DescentConfig cfg;
    cfg.max_iters = 400;

    // a single large lambda keeps the all-zero solution
    {
        const auto pts = ncr_run({1e5}, fe, src, Criterion::dop, d, cfg, grid);
        REQUIRE(pts.size() == 1);
        const double eps =
            dop_eval(Mapping{pts[0].mapping}, pts[0].table, fe, src, d, tol).value;
        CHECK(eps == doctest::Approx(2 * q_function(0.3)).epsilon(2e-3));
    }

    // descending schedule ends near the high-SNR one-bit limit 2 Q(2 sqrt(D))
    {
        std::vector<double> schedule;
        for (int i = 0; i <= 16; ++i) schedule.push_back(std::pow(10.0, 3.0 - 0.5 * i));
        const auto pts = ncr_run(schedule, fe, src, Criterion::dop, d, cfg, grid);
        const auto& last = pts.back();
        const double eps = dop_eval(Mapping{last.mapping}, last.table, fe, src, d, tol).value;
        CHECK(eps == doctest::Approx(2 * q_function(0.6)).epsilon(0.02));
        CHECK_THROWS_AS(ncr_run({1.0, 2.0}, fe, src, Criterion::dop, d, cfg, grid),
                        std::invalid_argument);
    }
}

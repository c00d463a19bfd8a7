#include "qjscc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <stdexcept>
#include <vector>

namespace qjscc {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Accumulator {
    std::int64_t n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const Accumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const double total = static_cast<double>(n + o.n);
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
    SimEstimate estimate() const {
        SimEstimate e;
        e.n = n;
        e.mean = mean;
        if (n > 1) e.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
        return e;
    }
};

template <typename PerSample>
SimEstimate run_batched(const SimConfig& cfg, int threads, PerSample&& per_sample) {
    if (cfg.n_samples < 1) throw std::invalid_argument("simulate: need at least one sample");
    const std::int64_t batch = cfg.batch > 0 ? cfg.batch : 65536;
    const std::int64_t n_batches = (cfg.n_samples + batch - 1) / batch;

    auto run_batch = [&](std::int64_t b) {
        Accumulator acc;
        const std::int64_t lo = b * batch;
        const std::int64_t hi = std::min(cfg.n_samples, lo + batch);
        for (std::int64_t i = lo; i < hi; ++i)
            acc.add(per_sample(static_cast<std::uint64_t>(i)));
        return acc;
    };

    std::vector<Accumulator> results(static_cast<size_t>(n_batches));
    if (threads <= 1) {
        for (std::int64_t b = 0; b < n_batches; ++b) results[static_cast<size_t>(b)] = run_batch(b);
    } else {
        std::vector<std::future<void>> workers;
        std::atomic<std::int64_t> next{0};
        for (int t = 0; t < threads; ++t)
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::int64_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1))
                    results[static_cast<size_t>(b)] = run_batch(b);
            }));
        for (auto& w : workers) w.get();
    }
    Accumulator total;  // merged in batch order: independent of which thread ran what
    for (const auto& acc : results) total.merge(acc);
    return total.estimate();
}

}  // namespace

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t sample_index) {
    std::uint64_t s = seed;
    const std::uint64_t k1 = splitmix64(s);
    state_ = k1 ^ (sample_index * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
    (void)splitmix64(state_);
}

double SampleRng::uniform() {
    const std::uint64_t bits = splitmix64(state_) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;  // (0, 1]
}

double SampleRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

SimEstimate simulate(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                     const SourceSpec& source, Criterion criterion, const SimConfig& cfg,
                     int threads) {
    fe.validate();
    source.validate();
    if (table.v_hat.size() != fe.outcome_count())
        throw std::invalid_argument("simulate: table size does not match the front end");
    if (criterion == Criterion::dop && !(table.target_d > 0))
        throw std::invalid_argument("simulate: DOP requires a table with target D");
    const int n_branches = fe.branches();

    return run_batched(cfg, threads, [&](std::uint64_t i) {
        SampleRng rng(cfg.seed, i);
        const double v = source.sigma_v * rng.normal();
        const double x = evaluate(mapping, v);
        int outcome;
        if (n_branches == 1) {
            outcome = quantize(x + fe.channel.noise_sigmas[0] * rng.normal(), fe.quantizer);
        } else {
            std::vector<int> bits(static_cast<size_t>(n_branches));
            for (int k = 0; k < n_branches; ++k) {
                const double z = x + fe.channel.noise_sigmas[k] * rng.normal();
                bits[static_cast<size_t>(k)] = z < 0 ? 1 : 0;
            }
            outcome = outcome_from_bits(bits);
        }
        const double err = v - table.v_hat[outcome];
        if (criterion == Criterion::mse) return err * err;
        return err * err >= table.target_d ? 1.0 : 0.0;
    });
}

SimEstimate estimate_power(const Mapping& mapping, const SourceSpec& source,
                           const SimConfig& cfg, int threads) {
    source.validate();
    return run_batched(cfg, threads, [&](std::uint64_t i) {
        SampleRng rng(cfg.seed, i);
        const double x = evaluate(mapping, source.sigma_v * rng.normal());
        return x * x;
    });
}

}  // namespace qjscc

#pragma once

#include <cstdint>

#include "qjscc/decoder.hpp"

namespace qjscc {

struct SimConfig {
    std::int64_t n_samples = 1000000;
    std::uint64_t seed = 0x5eed;
    std::int64_t batch = 65536;  ///< merge granularity; fixed so results do not depend on threads
};

struct SimEstimate {
    double mean = 0;
    double std_error = 0;  ///< sample standard deviation / sqrt(n)
    std::int64_t n = 0;
};

/// Counter-based per-sample random stream: sample index and seed fully
/// determine every draw, so any parallel split of the index range reproduces
/// identical values.
class SampleRng {
public:
    SampleRng(std::uint64_t seed, std::uint64_t sample_index);
    double uniform();  ///< in (0, 1]
    double normal();   ///< standard normal via Box-Muller

private:
    std::uint64_t state_;
    double spare_ = 0;
    bool has_spare_ = false;
};

/// End-to-end link simulation: V ~ N(0, sigma_v^2), X = f(V), per-branch AWGN,
/// quantization, table lookup; accumulates squared error (MSE) or the outage
/// indicator (DOP at the table's target D). Bit-reproducible for a fixed seed
/// regardless of the thread count.
SimEstimate simulate(const Mapping& mapping, const DecoderTable& table, const FrontEnd& fe,
                     const SourceSpec& source, Criterion criterion, const SimConfig& cfg,
                     int threads = 1);

/// Monte Carlo estimate of E[f(V)^2].
SimEstimate estimate_power(const Mapping& mapping, const SourceSpec& source,
                           const SimConfig& cfg, int threads = 1);

}  // namespace qjscc

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace qjscc {

/// Zero-mean Gaussian source V ~ N(0, sigma_v^2).
struct SourceSpec {
    double sigma_v = 1.0;
    void validate() const;
};

/// N observation branches, each adding independent N(0, sigma_{w_i}^2) noise.
struct ChannelSpec {
    Eigen::ArrayXd noise_sigmas;

    int branches() const { return static_cast<int>(noise_sigmas.size()); }
    bool equal_noise() const;
    void validate() const;

    static ChannelSpec single(double sigma_w);
    static ChannelSpec uniform(int n, double sigma_w);
};

/// Scalar K-level ADC with interior thresholds z_(1) < ... < z_(K-1); the
/// outer bounds are -inf and +inf. Cell j (0-based) is [z_(j), z_(j+1)) with
/// the lower bound inclusive, so a sample equal to a threshold lands in the
/// upper cell.
struct QuantizerSpec {
    Eigen::ArrayXd thresholds;

    int levels() const { return static_cast<int>(thresholds.size()) + 1; }
    double lower_edge(int cell) const;
    double upper_edge(int cell) const;
    void validate() const;
};

/// Symmetric one-bit comparator: threshold 0, cell 0 = (-inf, 0) carrying
/// symbol 1, cell 1 = [0, inf) carrying symbol 0.
QuantizerSpec one_bit_quantizer();

/// Mid-tread thresholds {-(K/2-1)d, ..., -d, 0, d, ..., (K/2-1)d} for even K.
QuantizerSpec uniform_midtread_quantizer(int levels, double step);

/// Cell index (0-based) of z under the half-open convention above.
int quantize(double z, const QuantizerSpec& spec);

/// SNR gamma = N P / sum_i sigma_{w_i}^2.
double snr(double power, const ChannelSpec& channel);

/// Bit pattern identifying one joint outcome of N one-bit ADCs. Outcome
/// index j (0-based, j = 0 .. 2^N - 1) carries the binary representation of
/// 2^N - 1 - j, most significant bit first; bit 1 marks a branch that saw a
/// negative sample. Outcome 0 is thus "all branches negative" and outcome
/// 2^N - 1 "all branches non-negative", matching the single-branch cell order.
struct OutcomeIndex {
    int index = 0;
    std::vector<int> bits;
};

OutcomeIndex outcome_bits(int outcome, int n_branches);
int outcome_from_bits(const std::vector<int>& bits);
int outcome_popcount(int outcome, int n_branches);

/// Receiver front end: N branches digitized by identical quantizers.
/// Multi-branch operation is defined for the symmetric one-bit ADC only.
struct FrontEnd {
    ChannelSpec channel;
    QuantizerSpec quantizer;

    int branches() const { return channel.branches(); }
    int outcome_count() const;
    void validate() const;
};

}  // namespace qjscc

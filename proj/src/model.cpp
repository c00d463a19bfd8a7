#include "qjscc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qjscc {

void SourceSpec::validate() const {
    if (!(sigma_v > 0) || !std::isfinite(sigma_v))
        throw std::invalid_argument("SourceSpec: sigma_v must be positive");
}

bool ChannelSpec::equal_noise() const {
    return (noise_sigmas == noise_sigmas[0]).all();
}

void ChannelSpec::validate() const {
    if (noise_sigmas.size() < 1)
        throw std::invalid_argument("ChannelSpec: need at least one branch");
    for (double s : noise_sigmas)
        if (!(s > 0) || !std::isfinite(s))
            throw std::invalid_argument("ChannelSpec: noise sigmas must be positive");
}

ChannelSpec ChannelSpec::single(double sigma_w) { return uniform(1, sigma_w); }

ChannelSpec ChannelSpec::uniform(int n, double sigma_w) {
    ChannelSpec c;
    c.noise_sigmas = Eigen::ArrayXd::Constant(n, sigma_w);
    c.validate();
    return c;
}

double QuantizerSpec::lower_edge(int cell) const {
    return cell == 0 ? -std::numeric_limits<double>::infinity() : thresholds[cell - 1];
}

double QuantizerSpec::upper_edge(int cell) const {
    return cell == levels() - 1 ? std::numeric_limits<double>::infinity() : thresholds[cell];
}

void QuantizerSpec::validate() const {
    if (levels() < 2) throw std::invalid_argument("QuantizerSpec: need K >= 2");
    for (int i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i]))
            throw std::invalid_argument("QuantizerSpec: thresholds must be finite");
        if (i > 0 && !(thresholds[i - 1] < thresholds[i]))
            throw std::invalid_argument("QuantizerSpec: thresholds must be strictly ascending");
    }
}

QuantizerSpec one_bit_quantizer() {
    QuantizerSpec q;
    q.thresholds = Eigen::ArrayXd::Zero(1);
    return q;
}

QuantizerSpec uniform_midtread_quantizer(int levels, double step) {
    if (levels < 2 || levels % 2 != 0)
        throw std::invalid_argument("uniform_midtread_quantizer: levels must be even and >= 2");
    if (!(step > 0) || !std::isfinite(step))
        throw std::domain_error("uniform_midtread_quantizer: step must be positive");
    QuantizerSpec q;
    q.thresholds = Eigen::ArrayXd(levels - 1);
    const int half = levels / 2;
    for (int i = 0; i < levels - 1; ++i) q.thresholds[i] = (i - half + 1) * step;
    return q;
}

int quantize(double z, const QuantizerSpec& spec) {
    if (!std::isfinite(z)) throw std::domain_error("quantize: non-finite sample");
    const double* begin = spec.thresholds.data();
    const double* end = begin + spec.thresholds.size();
    // first threshold strictly greater than z; ties go to the upper cell
    return static_cast<int>(std::upper_bound(begin, end, z) - begin);
}

double snr(double power, const ChannelSpec& channel) {
    if (!(power >= 0)) throw std::invalid_argument("snr: power must be >= 0");
    return channel.branches() * power / channel.noise_sigmas.square().sum();
}

OutcomeIndex outcome_bits(int outcome, int n_branches) {
    if (n_branches < 1 || n_branches > 30)
        throw std::domain_error("outcome_bits: unsupported branch count");
    const int count = 1 << n_branches;
    if (outcome < 0 || outcome >= count)
        throw std::domain_error("outcome_bits: outcome index out of range");
    OutcomeIndex oi;
    oi.index = outcome;
    oi.bits.resize(n_branches);
    const int value = count - 1 - outcome;
    for (int k = 0; k < n_branches; ++k)
        oi.bits[k] = (value >> (n_branches - 1 - k)) & 1;
    return oi;
}

int outcome_from_bits(const std::vector<int>& bits) {
    const int n = static_cast<int>(bits.size());
    int value = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::domain_error("outcome_from_bits: bits must be 0/1");
        value = (value << 1) | b;
    }
    return (1 << n) - 1 - value;
}

int outcome_popcount(int outcome, int n_branches) {
    const int count = 1 << n_branches;
    if (outcome < 0 || outcome >= count)
        throw std::domain_error("outcome_popcount: outcome index out of range");
    return __builtin_popcount(static_cast<unsigned>(count - 1 - outcome));
}

int FrontEnd::outcome_count() const {
    return branches() == 1 ? quantizer.levels() : (1 << branches());
}

void FrontEnd::validate() const {
    channel.validate();
    quantizer.validate();
    if (branches() > 1) {
        if (quantizer.levels() != 2 || quantizer.thresholds[0] != 0.0)
            throw std::invalid_argument(
                "FrontEnd: multiple observations require the symmetric one-bit ADC");
        if (branches() > 20)
            throw std::invalid_argument("FrontEnd: too many branches");
    }
}

}  // namespace qjscc

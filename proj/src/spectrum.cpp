#include "csim/spectrum.hpp"

#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csim::spectrum {

ChannelId::ChannelId(int index) : index_(index) {
    if (index < 0 || index >= kChannelCount) {
        throw std::out_of_range("channel index out of range: " + std::to_string(index));
    }
}

ChannelSet::ChannelSet(std::initializer_list<int> channels) {
    for (int c : channels) insert(ChannelId(c));
}

ChannelSet ChannelSet::range(int first, int last) {
    ChannelSet s;
    for (int c = first; c <= last; ++c) s.insert(ChannelId(c));
    return s;
}

int ChannelSet::size() const { return std::popcount(mask_); }

std::vector<ChannelId> ChannelSet::members() const {
    std::vector<ChannelId> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (int c = 0; c < kChannelCount; ++c) {
        if ((mask_ >> c) & 1U) out.emplace_back(c);
    }
    return out;
}

std::string ChannelSet::to_string() const {
    std::string s = "{";
    bool first = true;
    for (auto c : members()) {
        if (!first) s += ',';
        s += std::to_string(c.index());
        first = false;
    }
    return s + "}";
}

void NoiseModel::validate() const {
    if (u < 1) throw std::invalid_argument("noise model: u must be >= 1");
    if (!(lambda1 > 0.0 && lambda1 < lambda2 && std::isfinite(lambda2))) {
        throw std::invalid_argument("noise model: require 0 < lambda1 < lambda2 < inf");
    }
    for (double s : scale) {
        if (!(s > 0.0)) throw std::invalid_argument("noise model: channel scale must be positive");
    }
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise model: bandwidth must be positive");
}

const char* to_string(ChannelClass c) {
    switch (c) {
        case ChannelClass::Usable: return "usable";
        case ChannelClass::UsableWithBoost: return "usable-with-boost";
        case ChannelClass::Unusable: return "unusable";
    }
    return "unknown";
}

double noise_power_indicator(std::span<const double> samples, int u) {
    if (u < 1) throw std::invalid_argument("noise_power_indicator: u must be >= 1");
    if (samples.size() != static_cast<std::size_t>(2 * u)) {
        throw std::invalid_argument("noise_power_indicator: expected " + std::to_string(2 * u) +
                                    " samples, got " + std::to_string(samples.size()));
    }
    double sum = 0.0;
    for (double n : samples) sum += n * n;
    return sum / (2.0 * u);
}

namespace {

/// ln((u-1)!) for integer u.
double log_gamma_integer(int u) {
    double acc = 0.0;
    for (int k = 2; k < u; ++k) acc += std::log(static_cast<double>(k));
    return acc;
}

double region_bound(int j, const NoiseModel& m) {
    switch (j) {
        case 0: return 0.0;
        case 1: return m.lambda1;
        case 2: return m.lambda2;
        case 3: return std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("region index must be 1, 2 or 3");
}

}  // namespace

double noise_pdf(double y, int u) {
    if (u < 1) throw std::invalid_argument("noise_pdf: u must be >= 1");
    if (!(y >= 0.0)) throw std::invalid_argument("noise_pdf: y must be non-negative");
    if (y == 0.0) return u == 1 ? 1.0 : 0.0;
    const double du = static_cast<double>(u);
    const double log_f = du * std::log(du) - log_gamma_integer(u) + (du - 1.0) * std::log(y) - du * y;
    return std::exp(log_f);
}

double shannon_capacity(double bandwidth_hz, double snr_linear) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("shannon_capacity: bandwidth must be positive");
    if (!(snr_linear >= 0.0)) throw std::invalid_argument("shannon_capacity: snr must be non-negative");
    return bandwidth_hz * std::log2(1.0 + snr_linear);
}

ChannelVerdict classify_channel(double y, const NoiseModel& model) {
    ChannelVerdict v;
    v.indicator = y;
    if (y < model.lambda1) {
        v.cls = ChannelClass::Usable;
    } else if (y < model.lambda2) {
        v.cls = ChannelClass::UsableWithBoost;
        v.capacity_bps = shannon_capacity(model.bandwidth_hz, model.boost_signal_power / y);
    } else {
        v.cls = ChannelClass::Unusable;
    }
    return v;
}

double region_probability_quadrature(int region, const NoiseModel& model) {
    const double lo = region_bound(region - 1, model);
    const double hi = region_bound(region, model);
    const int u = model.u;
    auto f = [u](double y) { return noise_pdf(y, u); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 30, 1e-10, &err);
}

double region_probability(int region, const NoiseModel& model) {
    model.validate();
    if (model.u != 1) return region_probability_quadrature(region, model);
    // Exponential CDF
    const double lo = region_bound(region - 1, model);
    const double hi = region_bound(region, model);
    const double upper = std::isinf(hi) ? 0.0 : std::exp(-hi);
    return std::exp(-lo) - upper;
}

bool is_stable(ChannelId channel, const NoiseModel& model, double stability_threshold) {
    const double s = model.scale[static_cast<std::size_t>(channel.index())];
    // Scaling the draws by s scales the indicator by s^2.
    NoiseModel unit = model;
    unit.lambda1 = model.lambda1 / (s * s);
    unit.lambda2 = model.lambda2 / (s * s);
    const double usable = region_probability(1, unit) + region_probability(2, unit);
    return usable >= stability_threshold;
}

ChannelSet compute_us(ChannelSet g, ChannelSet lch, ChannelId default_channel) {
    if (!g.contains(default_channel)) throw std::invalid_argument("compute_us: default channel not in G");
    return g - (lch | singleton(default_channel));
}

SelectionResult select_stable_channel(std::span<const ChannelId> candidates, const NoiseModel& model,
                                      double stability_threshold, const NoiseSampler& sampler) {
    if (candidates.empty()) throw std::invalid_argument("select_stable_channel: no candidates");
    SelectionResult result;
    for (ChannelId c : candidates) {
        const auto samples = sampler(c);
        const double y = noise_power_indicator(samples, model.u);
        auto verdict = classify_channel(y, model);
        ++result.channels_sensed;
        const bool usable = verdict.usable();
        result.verdicts.push_back(std::move(verdict));
        if (usable && is_stable(c, model, stability_threshold)) {
            result.channel = c;
            return result;
        }
    }
    return result;
}

}  // namespace csim::spectrum

#pragma once

// Channel-set algebra over the 16 ZigBee channels and the cognitive-radio
// usability / stability tests driven by the received noise-power indicator.

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csim::spectrum {

inline constexpr int kChannelCount = 16;

class ChannelId {
public:
    /// Throws std::out_of_range outside [0, 15].
    explicit ChannelId(int index);
    int index() const { return index_; }
    auto operator<=>(const ChannelId&) const = default;

private:
    int index_;
};

class ChannelSet {
public:
    constexpr ChannelSet() = default;
    ChannelSet(std::initializer_list<int> channels);
    static constexpr ChannelSet from_mask(std::uint16_t mask) { return ChannelSet(mask, 0); }
    static constexpr ChannelSet all() { return ChannelSet(0xFFFF, 0); }
    static ChannelSet range(int first, int last);  // inclusive

    std::uint16_t mask() const { return mask_; }
    bool contains(ChannelId c) const { return (mask_ >> c.index()) & 1U; }
    bool empty() const { return mask_ == 0; }
    int size() const;
    void insert(ChannelId c) { mask_ |= static_cast<std::uint16_t>(1U << c.index()); }
    void erase(ChannelId c) { mask_ &= static_cast<std::uint16_t>(~(1U << c.index())); }

    /// Members in ascending index order.
    std::vector<ChannelId> members() const;
    std::string to_string() const;

    friend constexpr ChannelSet operator|(ChannelSet a, ChannelSet b) { return from_mask(a.mask_ | b.mask_); }
    friend constexpr ChannelSet operator&(ChannelSet a, ChannelSet b) { return from_mask(a.mask_ & b.mask_); }
    friend constexpr ChannelSet operator-(ChannelSet a, ChannelSet b) {
        return from_mask(static_cast<std::uint16_t>(a.mask_ & ~b.mask_));
    }
    /// Complement within G.
    friend constexpr ChannelSet operator~(ChannelSet a) { return from_mask(static_cast<std::uint16_t>(~a.mask_)); }
    friend constexpr bool operator==(ChannelSet a, ChannelSet b) { return a.mask_ == b.mask_; }
    ChannelSet& operator|=(ChannelSet o) { mask_ |= o.mask_; return *this; }

private:
    constexpr ChannelSet(std::uint16_t mask, int) : mask_(mask) {}
    std::uint16_t mask_ = 0;
};

inline ChannelSet singleton(ChannelId c) { return ChannelSet::from_mask(static_cast<std::uint16_t>(1U << c.index())); }

/// Noise-indicator model: Y ~ Gamma(u, 1/u) scaled per channel, split into
/// regions [0, lambda1), [lambda1, lambda2), [lambda2, inf).
struct NoiseModel {
    int u = 5;
    double lambda1 = 1.5;
    double lambda2 = 3.0;
    /// Amplitude multiplier of the unit-variance noise draws, per channel.
    std::array<double, kChannelCount> scale = filled(1.0);
    /// Link used to price a power-boosted channel.
    double bandwidth_hz = 2.0e6;
    double boost_signal_power = 10.0;

    /// Throws std::invalid_argument unless 0 < lambda1 < lambda2 and u >= 1.
    void validate() const;

    static constexpr std::array<double, kChannelCount> filled(double v) {
        std::array<double, kChannelCount> a{};
        for (auto& x : a) x = v;
        return a;
    }
};

enum class ChannelClass { Usable, UsableWithBoost, Unusable };

const char* to_string(ChannelClass c);

struct ChannelVerdict {
    ChannelClass cls = ChannelClass::Unusable;
    double indicator = 0.0;
    std::optional<double> capacity_bps;

    bool usable() const { return cls != ChannelClass::Unusable; }
};

/// Mean of squared samples; `samples` must hold exactly 2u values.
double noise_power_indicator(std::span<const double> samples, int u);

/// Density of the indicator: u^u / (u-1)! * y^(u-1) * exp(-u y).
double noise_pdf(double y, int u);

ChannelVerdict classify_channel(double y, const NoiseModel& model);

double shannon_capacity(double bandwidth_hz, double snr_linear);

/// pi_j for region j in {1, 2, 3} of the unscaled indicator.
double region_probability(int region, const NoiseModel& model);
/// Same quantity always evaluated by adaptive quadrature.
double region_probability_quadrature(int region, const NoiseModel& model);

/// pi_1 + pi_2 under the channel's noise scale reaches the threshold.
bool is_stable(ChannelId channel, const NoiseModel& model, double stability_threshold);

/// US = G - (LCH u {default}). Throws std::invalid_argument if default is not in G.
ChannelSet compute_us(ChannelSet g, ChannelSet lch, ChannelId default_channel);

/// Supplies the 2u noise samples the radio observes on a channel right now.
using NoiseSampler = std::function<std::vector<double>(ChannelId)>;

struct SelectionResult {
    std::optional<ChannelId> channel;
    int channels_sensed = 0;
    std::vector<ChannelVerdict> verdicts;  // one per sensed channel, in order
};

/// Sequential sensing: the first channel found usable is stability-tested;
/// a stable one is returned, otherwise sensing continues down the list.
SelectionResult select_stable_channel(std::span<const ChannelId> candidates, const NoiseModel& model,
                                      double stability_threshold, const NoiseSampler& sampler);

}  // namespace csim::spectrum

// Mode labels, k-grid discretization and the per-circuit mode universe.
#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pathghz/errors.hpp"

namespace pathghz {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Coefficients below this magnitude are pruned after simplification.
inline constexpr double kCoeffEps = 1e-12;

// Waveguide channels of the GHZ circuit: four source outputs, the target
// detector and the six labeled detector ports D_{n,m}.
enum class Channel : std::uint8_t {
    S1 = 0,
    S2,
    S3,
    S4,
    T,
    D1_0,
    D1_1,
    D2_0,
    D2_1,
    D3_0,
    D3_1,
};

inline constexpr std::array<Channel, 4> kSourceChannels = {Channel::S1, Channel::S2, Channel::S3,
                                                           Channel::S4};
inline constexpr std::array<Channel, 7> kDetectorChannels = {
    Channel::T,    Channel::D1_0, Channel::D1_1, Channel::D2_0,
    Channel::D2_1, Channel::D3_0, Channel::D3_1};

inline std::string_view channel_name(Channel c) {
    switch (c) {
        case Channel::S1: return "1";
        case Channel::S2: return "2";
        case Channel::S3: return "3";
        case Channel::S4: return "4";
        case Channel::T: return "T";
        case Channel::D1_0: return "D1_0";
        case Channel::D1_1: return "D1_1";
        case Channel::D2_0: return "D2_0";
        case Channel::D2_1: return "D2_1";
        case Channel::D3_0: return "D3_0";
        case Channel::D3_1: return "D3_1";
    }
    return "?";
}

// Uniform wavevector grid. A single-bin grid is the single-mode idealization:
// the bin sits at k0 and carries unit integration measure.
struct KGrid {
    double k0 = 0.0;
    double dk = 0.0;
    int n_bins = 1;

    void validate() const {
        if (n_bins < 1) throw validation_error("grid.n_bins must be >= 1");
        if (n_bins > 1 && !(dk > 0.0))
            throw validation_error("grid.dk must be > 0 for multi-bin grids");
    }

    double wavevector(int bin) const {
        if (n_bins == 1) return k0;
        return k0 + (static_cast<double>(bin) - 0.5 * (n_bins - 1)) * dk;
    }

    // dk weight of one bin in discretized integrals; 1 for the single-bin case.
    double measure() const { return n_bins == 1 ? 1.0 : dk; }

    friend bool operator==(const KGrid&, const KGrid&) = default;
};

// One bosonic mode: a channel at one k bin. Ordering is channel-major so
// monomials and occupation lists have a canonical sorted form.
struct ModeId {
    Channel channel;
    int kbin = 0;

    auto operator<=>(const ModeId&) const = default;
};

inline std::string mode_name(ModeId m) {
    return std::string(channel_name(m.channel)) + "@k" + std::to_string(m.kbin);
}

// The closed set of modes a circuit declares: a channel list plus one k grid.
// Operators and kets carry their universe; mixing universes is a configuration
// error.
class ModeUniverse {
   public:
    ModeUniverse() = default;

    ModeUniverse(std::vector<Channel> channels, KGrid grid)
        : channels_(std::move(channels)), grid_(grid) {
        grid_.validate();
        std::sort(channels_.begin(), channels_.end());
        channels_.erase(std::unique(channels_.begin(), channels_.end()), channels_.end());
        if (channels_.empty()) throw validation_error("mode universe needs at least one channel");
    }

    bool contains(ModeId m) const {
        return m.kbin >= 0 && m.kbin < grid_.n_bins &&
               std::binary_search(channels_.begin(), channels_.end(), m.channel);
    }

    void require(ModeId m) const {
        if (!contains(m))
            throw validation_error("mode " + mode_name(m) + " is not part of this universe");
    }

    const std::vector<Channel>& channels() const { return channels_; }
    const KGrid& grid() const { return grid_; }
    int mode_count() const { return static_cast<int>(channels_.size()) * grid_.n_bins; }

    friend bool operator==(const ModeUniverse&, const ModeUniverse&) = default;

   private:
    std::vector<Channel> channels_;
    KGrid grid_;
};

inline ModeUniverse source_universe(const KGrid& grid) {
    return ModeUniverse({kSourceChannels.begin(), kSourceChannels.end()}, grid);
}

inline ModeUniverse detector_universe(const KGrid& grid) {
    return ModeUniverse({kDetectorChannels.begin(), kDetectorChannels.end()}, grid);
}

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

}  // namespace pathghz

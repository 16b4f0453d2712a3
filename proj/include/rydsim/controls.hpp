#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "rydsim/grid.hpp"

namespace ryd {

using complexd = std::complex<double>;

enum class Channel { BlueLeft = 0, RedLeft = 1, BlueRight = 2, RedRight = 3 };

inline constexpr std::array<Channel, 4> all_channels = {
    Channel::BlueLeft, Channel::RedLeft, Channel::BlueRight, Channel::RedRight};

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);
inline bool is_right_atom(Channel c) {
    return c == Channel::BlueRight || c == Channel::RedRight;
}

// The four control values at one time step.
struct ControlSample {
    complexd blue_left{0.0, 0.0};
    complexd red_left{0.0, 0.0};
    complexd blue_right{0.0, 0.0};
    complexd red_right{0.0, 0.0};
};

// Four complex Rabi-frequency channels (rad/ns) on a shared grid:
// blue/red lasers for the left and right atom.
class ControlSet {
  public:
    ControlSet() = default;
    explicit ControlSet(const TimeGrid& grid);

    const TimeGrid& grid() const { return grid_; }
    int n_steps() const { return grid_.n_steps; }

    Eigen::VectorXcd& channel(Channel c) { return channels_[static_cast<int>(c)]; }
    const Eigen::VectorXcd& channel(Channel c) const {
        return channels_[static_cast<int>(c)];
    }

    ControlSample sample(int k) const {
        return ControlSample{channels_[0](k), channels_[1](k), channels_[2](k),
                             channels_[3](k)};
    }

    // Throws if any sample is non-finite.
    void check_finite() const;

    double peak_amplitude(Channel c) const;
    double peak_amplitude() const;

    ControlSet scaled(double factor) const;
    // Right-atom channels delayed by delta ns (linear interpolation between
    // midpoint samples, zero outside the grid). |delta| must not exceed the
    // grid span.
    ControlSet right_shifted(double delta) const;

    // Resample onto a grid with a different number of steps over the same
    // window (linear interpolation between midpoints).
    ControlSet resampled(int n_steps) const;

    // Exact piecewise-constant refinement: every step split into `factor`
    // equal sub-steps carrying the same value.
    ControlSet subdivided(int factor) const;

    // Plain-text pulse dump: t_ns, re/im of the four channels in MHz.
    void save_csv(const std::string& path) const;
    static ControlSet load_csv(const std::string& path);

  private:
    TimeGrid grid_;
    std::array<Eigen::VectorXcd, 4> channels_;
};

// Discrete Fourier transform of one channel, reported in the two-color
// rotating frame (zero = two-photon resonance). Frequencies ascending in
// rad/ns, magnitudes |X(w)| with X scaled by dt so Parseval holds:
// sum |x_k|^2 dt = sum |X_m|^2 df.
struct Spectrum {
    Eigen::VectorXd omega;      // rad/ns
    Eigen::VectorXd magnitude;  // |X|
};

Spectrum spectrum(const ControlSet& controls, Channel c);

}  // namespace ryd

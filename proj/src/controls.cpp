#include "rydsim/controls.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rydsim/csv.hpp"
#include "rydsim/units.hpp"

namespace ryd {

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::BlueLeft: return "blue_left";
        case Channel::RedLeft: return "red_left";
        case Channel::BlueRight: return "blue_right";
        case Channel::RedRight: return "red_right";
    }
    return "?";
}

Channel channel_from_name(const std::string& name) {
    for (Channel c : all_channels)
        if (name == channel_name(c)) return c;
    throw std::invalid_argument("unknown channel: " + name);
}

ControlSet::ControlSet(const TimeGrid& grid) : grid_(grid) {
    for (auto& ch : channels_) ch = Eigen::VectorXcd::Zero(grid.n_steps);
}

void ControlSet::check_finite() const {
    for (const auto& ch : channels_)
        for (Eigen::Index k = 0; k < ch.size(); ++k)
            if (!std::isfinite(ch(k).real()) || !std::isfinite(ch(k).imag()))
                throw std::invalid_argument("ControlSet: non-finite sample");
}

double ControlSet::peak_amplitude(Channel c) const {
    const auto& ch = channel(c);
    double peak = 0.0;
    for (Eigen::Index k = 0; k < ch.size(); ++k) peak = std::max(peak, std::abs(ch(k)));
    return peak;
}

double ControlSet::peak_amplitude() const {
    double peak = 0.0;
    for (Channel c : all_channels) peak = std::max(peak, peak_amplitude(c));
    return peak;
}

ControlSet ControlSet::scaled(double factor) const {
    ControlSet out = *this;
    for (auto& ch : out.channels_) ch *= factor;
    return out;
}

namespace {

// Linear interpolation between midpoint samples; zero outside the grid.
complexd interp_midpoints(const Eigen::VectorXcd& ch, const TimeGrid& grid, double t) {
    if (t < grid.t_start || t > grid.t_stop) return {0.0, 0.0};
    double x = (t - grid.t_start) / grid.dt() - 0.5;
    if (x <= 0.0) return ch(0);
    int n = static_cast<int>(ch.size());
    if (x >= n - 1) return ch(n - 1);
    int k = static_cast<int>(std::floor(x));
    double f = x - k;
    return (1.0 - f) * ch(k) + f * ch(k + 1);
}

}  // namespace

ControlSet ControlSet::right_shifted(double delta) const {
    if (std::abs(delta) > grid_.span())
        throw std::invalid_argument("time shift exceeds the grid span");
    if (delta == 0.0) return *this;
    ControlSet out = *this;
    for (Channel c : {Channel::BlueRight, Channel::RedRight}) {
        const auto& src = channel(c);
        auto& dst = out.channel(c);
        for (int k = 0; k < grid_.n_steps; ++k)
            dst(k) = interp_midpoints(src, grid_, grid_.midpoint(k) - delta);
    }
    return out;
}

ControlSet ControlSet::resampled(int n_steps) const {
    TimeGrid grid(grid_.t_start, grid_.t_stop, n_steps);
    ControlSet out(grid);
    for (Channel c : all_channels) {
        const auto& src = channel(c);
        auto& dst = out.channel(c);
        for (int k = 0; k < n_steps; ++k)
            dst(k) = interp_midpoints(src, grid_, grid.midpoint(k));
    }
    return out;
}

ControlSet ControlSet::subdivided(int factor) const {
    if (factor < 1) throw std::invalid_argument("subdivision factor must be >= 1");
    TimeGrid grid(grid_.t_start, grid_.t_stop, grid_.n_steps * factor);
    ControlSet out(grid);
    for (Channel c : all_channels) {
        const auto& src = channel(c);
        auto& dst = out.channel(c);
        for (int k = 0; k < grid.n_steps; ++k) dst(k) = src(k / factor);
    }
    return out;
}

void ControlSet::save_csv(const std::string& path) const {
    std::vector<std::string> header = {"t_ns"};
    for (Channel c : all_channels) {
        header.push_back(std::string("re_") + channel_name(c) + "_mhz");
        header.push_back(std::string("im_") + channel_name(c) + "_mhz");
    }
    CsvWriter csv(path, header);
    for (int k = 0; k < grid_.n_steps; ++k) {
        std::vector<double> row = {grid_.midpoint(k)};
        for (const auto& ch : channels_) {
            row.push_back(mhz_from_angular(ch(k).real()));
            row.push_back(mhz_from_angular(ch(k).imag()));
        }
        csv.write_row(row);
    }
}

ControlSet ControlSet::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pulse dump: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty pulse dump: " + path);
    std::vector<double> times;
    std::array<std::vector<complexd>, 4> cols;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 9)
            throw std::runtime_error("pulse dump row must have 9 columns");
        times.push_back(vals[0]);
        for (int c = 0; c < 4; ++c)
            cols[c].emplace_back(angular_from_mhz(vals[1 + 2 * c]),
                                 angular_from_mhz(vals[2 + 2 * c]));
    }
    int n = static_cast<int>(times.size());
    if (n < 2) throw std::runtime_error("pulse dump needs at least 2 samples");
    double dt = times[1] - times[0];
    TimeGrid grid(times.front() - 0.5 * dt, times.back() + 0.5 * dt, n);
    ControlSet out(grid);
    for (int c = 0; c < 4; ++c)
        for (int k = 0; k < n; ++k)
            out.channel(static_cast<Channel>(c))(k) = cols[c][k];
    out.check_finite();
    return out;
}

Spectrum spectrum(const ControlSet& controls, Channel c) {
    const auto& ch = controls.channel(c);
    int n = static_cast<int>(ch.size());
    if (n < 16) throw std::invalid_argument("spectrum needs at least 16 samples");
    double dt = controls.grid().dt();
    Spectrum sp;
    sp.omega.resize(n);
    sp.magnitude.resize(n);
    // Plain DFT; sizes here stay in the low thousands.
    for (int m = 0; m < n; ++m) {
        int shifted = m - n / 2;
        complexd acc(0.0, 0.0);
        double w = two_pi * shifted / (n * dt);
        for (int k = 0; k < n; ++k) {
            double phase = -w * (controls.grid().midpoint(k) - controls.grid().t_start);
            acc += ch(k) * std::polar(1.0, phase);
        }
        sp.omega(m) = w;
        sp.magnitude(m) = std::abs(acc * dt);
    }
    return sp;
}

}  // namespace ryd

#pragma once

#include <stdexcept>

namespace ryd {

// Uniform time grid. Controls are piecewise constant, one sample per step,
// sampled at the interval midpoints t_start + (k + 1/2) dt.
struct TimeGrid {
    double t_start = 0.0;
    double t_stop = 0.0;
    int n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double start, double stop, int steps)
        : t_start(start), t_stop(stop), n_steps(steps) {
        if (steps < 2)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
        if (!(stop > start))
            throw std::invalid_argument("TimeGrid: t_stop must exceed t_start");
    }

    double dt() const { return (t_stop - t_start) / n_steps; }
    double span() const { return t_stop - t_start; }
    double midpoint(int k) const { return t_start + (k + 0.5) * dt(); }
    double boundary(int k) const { return t_start + k * dt(); }

    bool operator==(const TimeGrid&) const = default;
};

}  // namespace ryd

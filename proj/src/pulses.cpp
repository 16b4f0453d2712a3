#include "rydsim/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rydsim/propagate.hpp"
#include "rydsim/units.hpp"

namespace ryd {

double blackman(double t, double t0, double T, double e0) {
    if (!(T > 0.0)) throw std::invalid_argument("blackman: duration must be positive");
    double x = t - t0;
    if (x < 0.0 || x > T) return 0.0;
    constexpr double a = 0.16;
    return 0.5 * e0 *
           (1.0 - a - std::cos(two_pi * x / T) + a * std::cos(2.0 * two_pi * x / T));
}

double gaussian_windowed(double t, double t0, double T, double e0, double center,
                         double sigma) {
    if (!(T > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("gaussian_windowed: positive width required");
    if (t < t0 || t > t0 + T) return 0.0;
    auto bump = [&](double x) {
        double z = (x - center) / sigma;
        return std::exp(-0.5 * z * z);
    };
    // Shift so the envelope is exactly zero at the window edges.
    double edge = std::max(bump(t0), bump(t0 + T));
    double denom = 1.0 - edge;
    if (denom <= 0.0) return 0.0;
    return e0 * std::max(0.0, (bump(t) - edge) / denom);
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Simultaneous: return "simultaneous";
        case Scheme::Stirap: return "stirap";
        case Scheme::Mixed: return "mixed";
        case Scheme::Custom: return "custom";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::Simultaneous, Scheme::Stirap, Scheme::Mixed, Scheme::Custom})
        if (name == scheme_name(s)) return s;
    throw std::invalid_argument("unknown scheme: " + name);
}

void PulseSchedule::validate() const {
    if (!(total_time > 0.0))
        throw std::invalid_argument("PulseSchedule: total_time must be positive");
    constexpr double tol = 1e-9;
    for (const auto& p : pulses) {
        if (!(p.duration > 0.0))
            throw std::invalid_argument("PulseSchedule: sub-pulse duration must be positive");
        if (p.peak < 0.0)
            throw std::invalid_argument("PulseSchedule: negative peak amplitude");
        if (p.start < -tol || p.start + p.duration > total_time + tol)
            throw std::invalid_argument("PulseSchedule: sub-pulse outside [0, T]");
        if (p.shape == PulseShape::Gaussian && !(p.sigma > 0.0))
            throw std::invalid_argument("PulseSchedule: gaussian sub-pulse needs sigma > 0");
    }
}

double PulseSchedule::envelope(Channel c, double t) const {
    double v = 0.0;
    for (const auto& p : pulses) {
        if (p.channel != c) continue;
        if (p.shape == PulseShape::Blackman)
            v += blackman(t, p.start, p.duration, p.peak);
        else
            v += gaussian_windowed(t, p.start, p.duration, p.peak, p.center, p.sigma);
    }
    return v;
}

ControlSet render(const PulseSchedule& schedule, int n_steps) {
    schedule.validate();
    TimeGrid grid(0.0, schedule.total_time, n_steps);
    ControlSet out(grid);
    for (Channel c : all_channels) {
        auto& ch = out.channel(c);
        for (int k = 0; k < n_steps; ++k)
            ch(k) = complexd(schedule.envelope(c, grid.midpoint(k)), 0.0);
    }
    return out;
}

namespace {

void add_blackman_pair(PulseSchedule& s, bool right_atom, double start, double duration,
                       double peak) {
    Channel blue = right_atom ? Channel::BlueRight : Channel::BlueLeft;
    Channel red = right_atom ? Channel::RedRight : Channel::RedLeft;
    s.pulses.push_back({PulseShape::Blackman, blue, start, duration, peak, 0, 0});
    s.pulses.push_back({PulseShape::Blackman, red, start, duration, peak, 0, 0});
}

// One STIRAP pair within [start, start+width]. Forward ordering: the red
// Stokes bump precedes the blue pump by delay_fraction * width; reversed
// ordering swaps the two, which is what transfers |r> back to |0>.
void add_stirap_pair(PulseSchedule& s, bool right_atom, double start, double width,
                     double peak, double delay_fraction, bool reversed) {
    Channel blue = right_atom ? Channel::BlueRight : Channel::BlueLeft;
    Channel red = right_atom ? Channel::RedRight : Channel::RedLeft;
    double sigma = width / 6.0;
    double mid = start + 0.5 * width;
    double offset = 0.5 * delay_fraction * width;
    double early = mid - offset;
    double late = mid + offset;
    s.pulses.push_back({PulseShape::Gaussian, red, start, width, peak,
                        reversed ? late : early, sigma});
    s.pulses.push_back({PulseShape::Gaussian, blue, start, width, peak,
                        reversed ? early : late, sigma});
}

}  // namespace

PulseSchedule make_simultaneous(double t_pi, double t_2pi, double amp_pi,
                                double amp_2pi) {
    if (!(t_pi > 0.0) || !(t_2pi > 0.0))
        throw std::invalid_argument("make_simultaneous: durations must be positive");
    PulseSchedule s;
    s.scheme = Scheme::Simultaneous;
    s.total_time = 2.0 * t_pi + t_2pi;
    add_blackman_pair(s, false, 0.0, t_pi, amp_pi);
    add_blackman_pair(s, true, t_pi, t_2pi, amp_2pi);
    add_blackman_pair(s, false, t_pi + t_2pi, t_pi, amp_pi);
    s.validate();
    return s;
}

PulseSchedule make_stirap(double t_left, double t_right, double amp_left,
                          double amp_right, double delay_fraction) {
    if (!(t_left > 0.0) || !(t_right > 0.0))
        throw std::invalid_argument("make_stirap: durations must be positive");
    if (!(delay_fraction > 0.0 && delay_fraction < 1.0))
        throw std::invalid_argument(
            "make_stirap: Stokes and pump must overlap (delay_fraction in (0,1))");
    PulseSchedule s;
    s.scheme = Scheme::Stirap;
    s.total_time = 2.0 * t_left + t_right;
    double half = 0.5 * t_right;
    add_stirap_pair(s, false, 0.0, t_left, amp_left, delay_fraction, false);
    add_stirap_pair(s, true, t_left, half, amp_right, delay_fraction, false);
    add_stirap_pair(s, true, t_left + half, half, amp_right, delay_fraction, true);
    add_stirap_pair(s, false, t_left + t_right, t_left, amp_left, delay_fraction, true);
    s.validate();
    return s;
}

PulseSchedule make_mixed(double t_left, double t_right, double overlap,
                         double amp_left, double amp_right, double delay_fraction) {
    if (!(t_left > 0.0) || !(t_right > 0.0))
        throw std::invalid_argument("make_mixed: durations must be positive");
    if (overlap < 0.0 || overlap >= 0.5 * t_right)
        throw std::invalid_argument(
            "make_mixed: overlap must be smaller than half the central pulse");
    if (!(delay_fraction > 0.0 && delay_fraction < 1.0))
        throw std::invalid_argument("make_mixed: delay_fraction in (0,1) required");
    PulseSchedule s;
    s.scheme = Scheme::Mixed;
    s.total_time = 2.0 * t_left + t_right - 2.0 * overlap;
    add_stirap_pair(s, false, 0.0, t_left, amp_left, delay_fraction, false);
    add_blackman_pair(s, true, t_left - overlap, t_right, amp_right);
    add_stirap_pair(s, false, t_left + t_right - 2.0 * overlap, t_left, amp_left,
                    delay_fraction, true);
    s.validate();
    return s;
}

namespace {

Vec16 basis_vec(int index) {
    Vec16 v = Vec16::Zero();
    v(index) = 1.0;
    return v;
}

double golden_max(double lo, double hi, int iters, const std::function<double(double)>& f) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// integral of the squared unit Blackman shape
constexpr double blackman_sq_integral = 0.3046;

}  // namespace

double calibrate_pi_amplitude(const SystemParams& params, double t_pi,
                              const CalibrationOptions& opts) {
    params.validate();
    if (!(t_pi > 0.0)) throw std::invalid_argument("calibrate: t_pi must be positive");
    // Effective two-photon area pi after adiabatic elimination:
    // integral(Omega^2/(2 Delta1)) dt = pi gives the starting bracket.
    // Bracket tightly around the effective-area estimate: neighboring
    // transfer lobes sit a factor sqrt(3) away in amplitude.
    double guess = std::sqrt(two_pi * std::abs(params.delta1) /
                             (blackman_sq_integral * t_pi));
    double lo = opts.amp_lo > 0.0 ? opts.amp_lo : 0.8 * guess;
    double hi = opts.amp_hi > 0.0 ? opts.amp_hi : 1.25 * guess;
    int r0 = basis::pair_from_label("r0");
    auto transfer = [&](double amp) {
        PulseSchedule s;
        s.scheme = Scheme::Custom;
        s.total_time = t_pi;
        add_blackman_pair(s, false, 0.0, t_pi, amp);
        ControlSet cs = render(s, opts.n_steps);
        auto [state, traj] = propagate_state(params, cs, basis_vec(0));
        return std::norm(state(r0));
    };
    double best_a = lo, best_f = -1.0;
    for (int i = 0; i < opts.scan_points; ++i) {
        double a = lo + (hi - lo) * i / (opts.scan_points - 1);
        double f = transfer(a);
        if (f > best_f) {
            best_f = f;
            best_a = a;
        }
    }
    double step = (hi - lo) / (opts.scan_points - 1);
    return golden_max(std::max(lo, best_a - step), std::min(hi, best_a + step),
                      opts.refine_iters, transfer);
}

double calibrate_2pi_amplitude(const SystemParams& params, double t_2pi,
                               const CalibrationOptions& opts) {
    params.validate();
    if (!(t_2pi > 0.0)) throw std::invalid_argument("calibrate: t_2pi must be positive");
    // Return maxima repeat every factor sqrt(2) in amplitude (2 pi, 4 pi,
    // ...); keep the bracket well inside the first lobe.
    double guess = std::sqrt(2.0 * two_pi * std::abs(params.delta1) /
                             (blackman_sq_integral * t_2pi));
    double lo = opts.amp_lo > 0.0 ? opts.amp_lo : 0.85 * guess;
    double hi = opts.amp_hi > 0.0 ? opts.amp_hi : 1.18 * guess;
    int idx10 = basis::pair_from_label("10");
    auto ret = [&](double amp) {
        PulseSchedule s;
        s.scheme = Scheme::Custom;
        s.total_time = t_2pi;
        s.pulses.push_back(
            {PulseShape::Blackman, Channel::BlueRight, 0.0, t_2pi, amp, 0, 0});
        s.pulses.push_back(
            {PulseShape::Blackman, Channel::RedRight, 0.0, t_2pi, amp, 0, 0});
        ControlSet cs = render(s, opts.n_steps);
        auto [state, traj] = propagate_state(params, cs, basis_vec(idx10));
        return std::norm(state(idx10));
    };
    double best_a = lo, best_f = -1.0;
    for (int i = 0; i < opts.scan_points; ++i) {
        double a = lo + (hi - lo) * i / (opts.scan_points - 1);
        double f = ret(a);
        if (f > best_f) {
            best_f = f;
            best_a = a;
        }
    }
    double step = (hi - lo) / (opts.scan_points - 1);
    return golden_max(std::max(lo, best_a - step), std::min(hi, best_a + step),
                      opts.refine_iters, ret);
}

double calibrate_stirap_pi_amplitude(const SystemParams& params, double t_left,
                                     double delay_fraction,
                                     const CalibrationOptions& opts) {
    params.validate();
    if (!(t_left > 0.0)) throw std::invalid_argument("calibrate: t_left must be positive");
    int r0 = basis::pair_from_label("r0");
    auto transfer = [&](double amp) {
        PulseSchedule s;
        s.scheme = Scheme::Custom;
        s.total_time = t_left;
        add_stirap_pair(s, false, 0.0, t_left, amp, delay_fraction, false);
        ControlSet cs = render(s, opts.n_steps);
        auto [state, traj] = propagate_state(params, cs, basis_vec(0));
        return std::norm(state(r0));
    };
    // Adiabaticity scale: effective two-photon Rabi frequency times the
    // overlap time of order 10.
    double overlap = t_left / 3.0;
    double guess = std::sqrt(10.0 * 2.0 * std::abs(params.delta1) / overlap);
    double lo = opts.amp_lo > 0.0 ? opts.amp_lo : 0.4 * guess;
    double hi = opts.amp_hi > 0.0 ? opts.amp_hi : 4.0 * guess;
    int n = std::max(opts.scan_points, 17);
    std::vector<double> amps(n), vals(n);
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        amps[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
        vals[i] = transfer(amps[i]);
        best = std::max(best, vals[i]);
    }
    // The transfer saturates with amplitude; take the smallest amplitude
    // within 1e-4 of the best, refined by bisection against the threshold.
    double threshold = best - 1e-4;
    int first = 0;
    while (first < n && vals[first] < threshold) ++first;
    if (first == 0) return amps[0];
    if (first == n) return amps[n - 1];
    double a_lo = amps[first - 1], a_hi = amps[first];
    for (int it = 0; it < 30; ++it) {
        double mid = 0.5 * (a_lo + a_hi);
        (transfer(mid) >= threshold ? a_hi : a_lo) = mid;
    }
    return a_hi;
}

}  // namespace ryd

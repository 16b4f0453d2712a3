#pragma once

#include <string>
#include <vector>

#include "rydsim/controls.hpp"
#include "rydsim/system.hpp"

namespace ryd {

// Blackman window over [t0, t0+T] with peak e0 at the center, exactly zero
// at both ends and outside.
double blackman(double t, double t0, double T, double e0);

// Gaussian truncated to [t0, t0+T] and shifted so it vanishes exactly at the
// window edges, rescaled to peak e0 at t = center.
double gaussian_windowed(double t, double t0, double T, double e0, double center,
                         double sigma);

enum class Scheme { Simultaneous, Stirap, Mixed, Custom };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

enum class PulseShape { Blackman, Gaussian };

struct SubPulse {
    PulseShape shape = PulseShape::Blackman;
    Channel channel = Channel::BlueLeft;
    double start = 0.0;     // window start, ns
    double duration = 0.0;  // window length, ns
    double peak = 0.0;      // rad/ns
    // Gaussian only: center of the bump and its width.
    double center = 0.0;
    double sigma = 0.0;
};

// Declarative description of an analytic scheme; renders to a ControlSet.
struct PulseSchedule {
    Scheme scheme = Scheme::Custom;
    double total_time = 0.0;
    std::vector<SubPulse> pulses;

    void validate() const;
    double envelope(Channel c, double t) const;
};

ControlSet render(const PulseSchedule& schedule, int n_steps);

// pi(left) -> 2pi(right) -> pi(left), each a simultaneous Blackman pair with
// equal red/blue peaks on that atom. Sub-pulses must not overlap.
PulseSchedule make_simultaneous(double t_pi, double t_2pi, double amp_pi,
                                double amp_2pi);

// STIRAP pairs throughout: pi-STIRAP on the left atom, a there-and-back
// STIRAP (forward then reversed) on the right atom, then the reversed
// pi-STIRAP on the left. Gaussian envelopes with sigma = width/6; the Stokes
// pulse precedes the pump by delay_fraction of the sub-pulse width.
PulseSchedule make_stirap(double t_left, double t_right, double amp_left,
                          double amp_right, double delay_fraction);

// STIRAP pi pairs on the left atom, one simultaneous Blackman 2pi pair on
// the right; the left pulses are moved inward to overlap the central pulse.
PulseSchedule make_mixed(double t_left, double t_right, double overlap,
                         double amp_left, double amp_right,
                         double delay_fraction);

// Amplitude calibration under ideal unitary propagation. The shipped
// schemes never state peak amplitudes; these scans select them.
struct CalibrationOptions {
    double amp_lo = 0.0;  // rad/ns; 0 = auto bracket
    double amp_hi = 0.0;
    int scan_points = 33;
    int refine_iters = 40;
    int n_steps = 1000;
};

// Peak amplitude of a simultaneous Blackman pair of the given duration that
// maximizes |00> -> |r0> transfer (left atom) .
double calibrate_pi_amplitude(const SystemParams& params, double t_pi,
                              const CalibrationOptions& opts = {});
// Peak amplitude maximizing the |10> return probability after a full cycle
// of the right atom (unblocked 2pi rotation).
double calibrate_2pi_amplitude(const SystemParams& params, double t_2pi,
                               const CalibrationOptions& opts = {});
// Smallest amplitude of a left-atom STIRAP pair whose |00> -> |r0> transfer
// is within 1e-4 of the best over the scan (the transfer saturates with
// amplitude, so the argmax alone is ill-conditioned).
double calibrate_stirap_pi_amplitude(const SystemParams& params, double t_left,
                                     double delay_fraction,
                                     const CalibrationOptions& opts = {});

}  // namespace ryd

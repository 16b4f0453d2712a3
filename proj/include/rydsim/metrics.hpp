#pragma once

#include <map>
#include <string>

#include "rydsim/propagate.hpp"
#include "rydsim/system.hpp"

namespace ryd {

// F = 1/20 (|tr[O^dag U]|^2 + tr[U U^dag]) on the 4-dim logical subspace.
double gate_fidelity(const Eigen::Matrix4cd& u, const Eigen::Matrix4cd& target);

// diag(e^{i phi}, 1, 1, 1) composed with the free phase e^{-i e1_phase} per
// |1> factor accrued by the natural qubit evolution over the gate duration.
Eigen::Matrix4cd cphase_target(double phi, double e1_phase);

// Embed a logical 4x4 unitary into the 16-dim two-atom space (identity on
// the non-logical levels).
Mat16 embed_logical(const Eigen::Matrix4cd& u);

// B = max(P_1r) - 1/2 P_1r(T) - (max(P_rr) - 1/2 P_rr(T)), clipped to
// [0, 1]; traj_10 must record P_1r and traj_00 must record P_rr.
double blockade_efficiency(const Trajectory& traj_10, const Trajectory& traj_00);

struct GateReport {
    double fidelity = 0.0;
    double error = 1.0;
    double blockade_efficiency = 0.0;
    double leakage = 0.0;  // ||U^dag U - 1||
    std::map<std::string, double> peaks;

    std::string to_json() const;
};

// Advisory regime checks: peak Rabi frequency per channel against the
// blockade (u) and adiabatic-elimination (Delta1) scales, and the STIRAP
// adiabaticity product Omega * overlap time per atom.
struct RegimeReport {
    std::array<double, 4> peak = {};             // rad/ns per channel
    std::array<double, 4> blockade_ratio = {};   // peak / u
    std::array<double, 4> elimination_ratio = {};// peak / Delta1
    bool blockade_ok = true;                     // all ratios <= 0.5
    bool elimination_ok = true;
    std::array<double, 2> overlap_time = {};     // per atom, ns
    std::array<double, 2> adiabaticity = {};     // min-channel peak * overlap
    bool adiabatic_ok = true;                    // products > 10 where defined
};

RegimeReport regime_diagnostics(const SystemParams& params,
                                const ControlSet& controls);

}  // namespace ryd

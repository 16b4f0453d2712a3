#include "rydsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rydsim/csv.hpp"

namespace ryd {

double gate_fidelity(const Eigen::Matrix4cd& u, const Eigen::Matrix4cd& target) {
    complexd overlap = (target.adjoint() * u).trace();
    return (std::norm(overlap) + u.squaredNorm()) / 20.0;
}

Eigen::Matrix4cd cphase_target(double phi, double e1_phase) {
    Eigen::Matrix4cd o = Eigen::Matrix4cd::Zero();
    o(0, 0) = std::polar(1.0, phi);
    o(1, 1) = std::polar(1.0, -e1_phase);
    o(2, 2) = std::polar(1.0, -e1_phase);
    o(3, 3) = std::polar(1.0, -2.0 * e1_phase);
    return o;
}

Mat16 embed_logical(const Eigen::Matrix4cd& u) {
    Mat16 full = Mat16::Identity();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) full(basis::logical[a], basis::logical[b]) = u(a, b);
    return full;
}

double blockade_efficiency(const Trajectory& traj_10, const Trajectory& traj_00) {
    double term_1r = traj_10.column_max("P_1r") - 0.5 * traj_10.column_final("P_1r");
    double term_rr = traj_00.column_max("P_rr") - 0.5 * traj_00.column_final("P_rr");
    return std::clamp(term_1r - term_rr, 0.0, 1.0);
}

std::string GateReport::to_json() const {
    std::ostringstream out;
    out << "{\n";
    out << "  \"fidelity\": " << format_double(fidelity) << ",\n";
    out << "  \"error\": " << format_double(error) << ",\n";
    out << "  \"blockade_efficiency\": " << format_double(blockade_efficiency) << ",\n";
    out << "  \"leakage\": " << format_double(leakage) << ",\n";
    out << "  \"peaks\": {";
    bool first = true;
    for (const auto& [name, value] : peaks) {
        if (!first) out << ",";
        out << "\n    \"" << name << "\": " << format_double(value);
        first = false;
    }
    out << (peaks.empty() ? "}" : "\n  }") << "\n}\n";
    return out.str();
}

RegimeReport regime_diagnostics(const SystemParams& params, const ControlSet& controls) {
    params.validate();
    RegimeReport rep;
    for (int c = 0; c < 4; ++c) {
        rep.peak[c] = controls.peak_amplitude(static_cast<Channel>(c));
        rep.blockade_ratio[c] = rep.peak[c] / params.u;
        rep.elimination_ratio[c] =
            params.delta1 == 0.0
                ? (rep.peak[c] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0)
                : rep.peak[c] / std::abs(params.delta1);
        if (rep.blockade_ratio[c] > 0.5) rep.blockade_ok = false;
        if (rep.elimination_ratio[c] > 0.5) rep.elimination_ok = false;
    }
    double dt = controls.grid().dt();
    for (int atom = 0; atom < 2; ++atom) {
        Channel blue = atom == 0 ? Channel::BlueLeft : Channel::BlueRight;
        Channel red = atom == 0 ? Channel::RedLeft : Channel::RedRight;
        double pb = controls.peak_amplitude(blue);
        double pr = controls.peak_amplitude(red);
        if (pb == 0.0 || pr == 0.0) continue;
        const auto& chb = controls.channel(blue);
        const auto& chr = controls.channel(red);
        int overlap_steps = 0;
        for (int k = 0; k < controls.n_steps(); ++k)
            if (std::abs(chb(k)) >= 0.5 * pb && std::abs(chr(k)) >= 0.5 * pr)
                ++overlap_steps;
        rep.overlap_time[atom] = overlap_steps * dt;
        rep.adiabaticity[atom] = std::min(pb, pr) * rep.overlap_time[atom];
        if (rep.overlap_time[atom] > 0.0 && rep.adiabaticity[atom] <= 10.0)
            rep.adiabatic_ok = false;
    }
    return rep;
}

}  // namespace ryd

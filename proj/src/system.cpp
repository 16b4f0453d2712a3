#include "rydsim/system.hpp"

#include <cmath>
#include <stdexcept>

namespace ryd {

namespace basis {

int level_from_char(char c) {
    switch (c) {
        case '0': return q0;
        case '1': return q1;
        case 'i': return li;
        case 'r': return lr;
    }
    throw std::invalid_argument(std::string("unknown level label '") + c + "'");
}

std::string pair_label(int index) {
    static const char names[] = {'0', '1', 'i', 'r'};
    if (index < 0 || index > 15) throw std::invalid_argument("basis index out of range");
    return std::string{names[index / 4], names[index % 4]};
}

int pair_from_label(const std::string& label) {
    if (label.size() != 2)
        throw std::invalid_argument("two-atom label must have two characters: " + label);
    return pair_index(level_from_char(label[0]), level_from_char(label[1]));
}

Mat16 logical_projector() {
    Mat16 p = Mat16::Zero();
    for (int idx : logical) p(idx, idx) = 1.0;
    return p;
}

Mat16 swap_operator() {
    Mat16 s = Mat16::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) s(pair_index(b, a), pair_index(a, b)) = 1.0;
    return s;
}

}  // namespace basis

void SystemParams::validate() const {
    if (!(u > 0.0)) throw std::invalid_argument("SystemParams: u must be positive");
    if (!(tau_i > 0.0))
        throw std::invalid_argument("SystemParams: tau_i must be positive");
}

void Perturbation::validate() const {
    if (!(amp_scale > 0.0))
        throw std::invalid_argument("Perturbation: amp_scale must be positive");
    if (!std::isfinite(delta_ryd) || !std::isfinite(delta_time))
        throw std::invalid_argument("Perturbation: non-finite entry");
}

Mat4 build_h1q(const SystemParams& params, complexd omega_b, complexd omega_r) {
    Mat4 h = Mat4::Zero();
    h(basis::q1, basis::q1) = params.e1;
    h(basis::li, basis::li) = params.delta1;
    h(basis::lr, basis::lr) = params.delta2;
    h(basis::q0, basis::li) = 0.5 * omega_b;
    h(basis::li, basis::q0) = 0.5 * std::conj(omega_b);
    h(basis::li, basis::lr) = 0.5 * omega_r;
    h(basis::lr, basis::li) = 0.5 * std::conj(omega_r);
    return h;
}

Mat16 build_h2q(const SystemParams& params, const ControlSample& s) {
    Mat4 hl = build_h1q(params, s.blue_left, s.red_left);
    Mat4 hr = build_h1q(params, s.blue_right, s.red_right);
    Mat16 h = Mat16::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            for (int c = 0; c < 4; ++c) {
                h(basis::pair_index(a, c), basis::pair_index(b, c)) += hl(a, b);
                h(basis::pair_index(c, a), basis::pair_index(c, b)) += hr(a, b);
            }
        }
    int rr = basis::pair_index(basis::lr, basis::lr);
    h(rr, rr) -= params.u;
    return h;
}

std::vector<JumpOp> build_dissipator_ops(const SystemParams& params) {
    params.validate();
    Mat16 a1 = Mat16::Zero();
    Mat16 a2 = Mat16::Zero();
    for (int c = 0; c < 4; ++c) {
        a1(basis::pair_index(basis::q0, c), basis::pair_index(basis::li, c)) = 1.0;
        a2(basis::pair_index(c, basis::q0), basis::pair_index(c, basis::li)) = 1.0;
    }
    double rate = 1.0 / params.tau_i;
    return {JumpOp{a1, rate}, JumpOp{a2, rate}};
}

Mat16 apply_dissipator(const SystemParams& params, const Mat16& rho) {
    Mat16 out = Mat16::Zero();
    for (const auto& jump : build_dissipator_ops(params)) {
        Mat16 ada = jump.op.adjoint() * jump.op;
        out += jump.rate * (jump.op * rho * jump.op.adjoint() -
                            0.5 * (ada * rho + rho * ada));
    }
    return out;
}

std::pair<SystemParams, ControlSet> apply_perturbation(const SystemParams& params,
                                                       const ControlSet& controls,
                                                       const Perturbation& p) {
    p.validate();
    SystemParams out = params;
    out.delta2 += p.delta_ryd;
    if (p.is_identity()) return {out, controls};
    ControlSet shifted =
        p.delta_time == 0.0 ? controls : controls.right_shifted(p.delta_time);
    return {out, p.amp_scale == 1.0 ? shifted : shifted.scaled(p.amp_scale)};
}

}  // namespace ryd

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rydsim/controls.hpp"
#include "rydsim/units.hpp"

namespace ryd {

using Mat4 = Eigen::Matrix4cd;
using Mat16 = Eigen::Matrix<complexd, 16, 16>;
using Vec16 = Eigen::Vector<complexd, 16>;

// Single-atom levels |0>, |1>, |i>, |r>; two-atom product states indexed
// as 4 * left + right.
namespace basis {
inline constexpr int q0 = 0;
inline constexpr int q1 = 1;
inline constexpr int li = 2;
inline constexpr int lr = 3;

inline constexpr int pair_index(int left, int right) { return 4 * left + right; }

// Logical two-qubit subspace {|00>, |01>, |10>, |11>}.
inline constexpr std::array<int, 4> logical = {0, 1, 4, 5};

int level_from_char(char c);
std::string pair_label(int index);
// "rr", "0i", ... -> two-atom index
int pair_from_label(const std::string& label);

Mat16 logical_projector();
// Exchange of the two atoms: SWAP |ab> = |ba>.
Mat16 swap_operator();
}  // namespace basis

// Physical constants of the two-atom system, as angular frequencies in
// rad/ns and times in ns.
struct SystemParams {
    double delta1 = angular_from_ghz(1.273);  // one-photon detuning
    double delta2 = 0.0;                      // two-photon detuning
    double e1 = angular_from_ghz(9.100);      // qubit splitting
    double u = angular_from_mhz(57.26);       // Rydberg interaction energy
    double tau_i = 150.0;                     // intermediate-level lifetime
    double atom_separation = 5.0;             // micrometers, documentation only

    void validate() const;
};

// Multiplicative / additive errors applied to a (params, controls) pair:
// a Rydberg-level shift entering as two-photon detuning, a common scale on
// all control amplitudes, and a timing offset of the right-atom pulse pair.
struct Perturbation {
    double delta_ryd = 0.0;  // rad/ns
    double amp_scale = 1.0;
    double delta_time = 0.0;  // ns

    void validate() const;
    bool is_identity() const {
        return delta_ryd == 0.0 && amp_scale == 1.0 && delta_time == 0.0;
    }
};

// Single-atom Hamiltonian in the two-photon rotating frame. The couplings
// enter as Omega/2 on the (0,i) and (i,r) positions (conjugate below the
// diagonal), so a resonant pulse with integral(Omega dt) = pi inverts the
// transition; the diagonal is (0, E1, Delta1, Delta2).
Mat4 build_h1q(const SystemParams& params, complexd omega_b, complexd omega_r);

// Two-atom Hamiltonian H1(left) x 1 + 1 x H1(right) - u |rr><rr|.
Mat16 build_h2q(const SystemParams& params, const ControlSample& s);

struct JumpOp {
    Mat16 op;
    double rate;  // 1/ns
};

// Spontaneous decay |i> -> |0> on each atom with rate 1/tau.
std::vector<JumpOp> build_dissipator_ops(const SystemParams& params);

// Dissipator L_D(rho) = sum_k rate (A rho A^dag - 1/2 {A^dag A, rho}).
Mat16 apply_dissipator(const SystemParams& params, const Mat16& rho);

std::pair<SystemParams, ControlSet> apply_perturbation(const SystemParams& params,
                                                       const ControlSet& controls,
                                                       const Perturbation& p);

}  // namespace ryd

#pragma once

#include <utility>
#include <vector>

#include "rydsim/controls.hpp"
#include "rydsim/system.hpp"

namespace ryd {

struct TrajectorySpec {
    int stride = 1;
    std::vector<std::string> states;        // pair labels, e.g. "00", "rr"
    bool intermediate = false;              // sum over {0i, i0, ii, ir, ri}
    std::vector<std::string> phase_states;  // record arg <s|psi> (pure states)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::pair<std::string, std::vector<double>>> columns;

    const std::vector<double>* column(const std::string& name) const;
    double column_max(const std::string& name) const;
    double column_final(const std::string& name) const;
    void save_csv(const std::string& path) const;
};

struct PropagationOptions {
    // Operator-splitting order for the dissipative part (2, 4 or 6). The
    // Hamiltonian step itself is an exact exponential either way.
    int composition_order = 6;
    // Time-dependence handling: 2 = plain midpoint sampling (exact for the
    // piecewise-constant control model), 4 = midpoint plus the leading
    // Magnus corrections estimated from neighboring samples, for studies
    // that treat the samples as a smooth envelope.
    int magnus_order = 2;
};

// Midpoint exponential stepping: each step applies the exact exponential of
// the sampled Hamiltonian, optionally with the fourth-order Magnus
// correction for the envelope variation across the step.
std::pair<Vec16, Trajectory> propagate_state(const SystemParams& params,
                                             const ControlSet& controls,
                                             const Vec16& initial,
                                             const TrajectorySpec& spec = {},
                                             const PropagationOptions& opts = {});

Mat16 propagate_propagator(const SystemParams& params, const ControlSet& controls,
                           const PropagationOptions& opts = {});

// Propagates the four logical basis vectors and projects onto the logical
// subspace; leakage shows as a deviation of U^dag U from identity.
Eigen::Matrix4cd logical_evolution_map(const SystemParams& params,
                                       const ControlSet& controls,
                                       const PropagationOptions& opts = {});

// Same propagation, returning the map together with one trajectory per
// logical column in one pass.
struct LogicalRun {
    Eigen::Matrix4cd map;
    std::array<Trajectory, 4> trajectories;  // initial |00>, |01>, |10>, |11>
};

LogicalRun propagate_logical(const SystemParams& params, const ControlSet& controls,
                             const TrajectorySpec& spec,
                             const PropagationOptions& opts = {});

// Lindblad evolution d rho/dt = -i[H, rho] + L_D(rho), via a symmetric
// composition of the exact control-Hamiltonian exponential and the exact
// decay flow.
std::pair<Mat16, Trajectory> propagate_lindblad(const SystemParams& params,
                                                const ControlSet& controls,
                                                const Mat16& initial,
                                                const TrajectorySpec& spec = {},
                                                const PropagationOptions& opts = {});

// Costate backward propagation from sigma(T), using the exact adjoint of
// each forward step so that <sigma(t_k), rho(t_k)> is conserved stepwise.
// Returns sigma at every grid boundary, index 0..n_steps.
std::vector<Mat16> propagate_costate(const SystemParams& params,
                                     const ControlSet& controls,
                                     const Mat16& terminal,
                                     const PropagationOptions& opts = {});

namespace detail {

struct StepEig {
    Mat16 vectors;
    Eigen::Array<double, 16, 1> values;

    Mat16 unitary(double t) const;  // V exp(-i lambda t) V^dag
};

StepEig eigendecompose(const Mat16& h);

// The constant Hamiltonian representing step k: the midpoint sample, plus
// for magnus_order 4 the correction i dt^2/12 [H_k, H'_k] with the envelope
// derivative estimated from neighboring samples.
Mat16 step_hamiltonian(const SystemParams& params, const ControlSet& controls, int k,
                       int magnus_order);

// Exact flow of the spontaneous-decay dissipator alone over time t (t may
// be negative inside higher-order compositions).
void dissipator_flow(Mat16& rho, double gamma, double t);
void dissipator_flow_adjoint(Mat16& sigma, double gamma, double t);

struct CompositionCoeffs {
    std::vector<double> u;  // unitary stage widths, sum to 1
    std::vector<double> d;  // dissipator stage widths, u.size() + 1 entries
};
const CompositionCoeffs& composition(int order);

void lindblad_step(Mat16& rho, const StepEig& eig, double gamma, double dt,
                   const CompositionCoeffs& cc);
void lindblad_step_adjoint(Mat16& sigma, const StepEig& eig, double gamma,
                           double dt, const CompositionCoeffs& cc);

}  // namespace detail

}  // namespace ryd

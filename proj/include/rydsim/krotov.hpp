#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rydsim/controls.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/system.hpp"

namespace ryd {

// Ensemble of perturbed Hamiltonians for robustness optimization: member 0
// is the unperturbed system, members 1..n-1 sample the (Rydberg shift,
// amplitude scale) box on an even grid.
struct EnsembleSpec {
    int n_members = 24;
    double ryd_range = angular_from_khz(300.0);  // +- rad/ns
    double amp_range = 0.05;                     // +- fraction

    void validate() const;
    std::vector<Perturbation> members() const;
};

struct KrotovConfig {
    // Per-channel penalty weights; 0 selects them automatically so the first
    // update peaks at lambda_auto_fraction of the guess peak amplitude.
    std::array<double, 4> lambda = {0.0, 0.0, 0.0, 0.0};
    double lambda_auto_fraction = 0.01;
    int max_iters = 100;
    double j_tol = 0.0;  // stop when |Delta J| < j_tol (0 = run max_iters)
    // Fidelity sum divided by 16 N so that J = 0 at a perfect lossless gate;
    // switch off for the literal unnormalized double sum.
    bool normalize_fidelity = true;
    int n_jobs = 0;
    bool verbose = false;

    void validate() const;
};

struct IterationStats {
    int iter = 0;
    double j_total = 0.0;
    double fidelity_term = 0.0;
    double penalty_term = 0.0;
    std::vector<double> member_errors;
    double worst_member_error = 0.0;
    double wall_seconds = 0.0;
};

struct OptimizationRecord {
    std::vector<IterationStats> iterations;
    std::array<double, 4> lambda_used = {};
};

struct OptimizeResult {
    ControlSet controls;
    OptimizationRecord record;
};

// Smooth switch-on/off shape for the update: Blackman over the midpoint
// span, exactly zero at the first and last control samples.
double krotov_shape(const TimeGrid& grid, int k);

struct FunctionalTerms {
    double j = 0.0;
    double fidelity_term = 0.0;
    double penalty_term = 0.0;
    std::vector<double> member_errors;
};

// J = 1 - fidelity term + sum_j lambda_j sum_k |Omega_j - Omega_ref|^2 /
// S(t_k) dt, evaluated from the 16 N propagated basis elements at T.
// states_T is indexed [member][basis element], basis elements ordered as
// |a><b| with a, b running over the logical states.
FunctionalTerms functional_terms(const std::vector<std::array<Mat16, 16>>& states_T,
                                 const Mat16& target, const ControlSet& controls,
                                 const ControlSet& reference,
                                 const std::array<double, 4>& lambda,
                                 bool normalize, int n_members);

// Exact gradient of the fidelity term with respect to every control sample,
// both quadratures, at frozen controls. Layout: [channel][quadrature](k).
// Used by the finite-difference consistency tests and the automatic lambda
// choice.
struct GradientResult {
    std::array<std::array<Eigen::VectorXd, 2>, 4> grad;
    double fidelity_term = 0.0;
};

GradientResult krotov_gradient(const SystemParams& params, const ControlSet& controls,
                               const Mat16& target, const EnsembleSpec& ensemble,
                               const KrotovConfig& config);

// Ensemble-robust Krotov optimization of the Liouville-space functional:
// backward costate propagation with the previous controls, then a forward
// sweep applying the time-local update before each step. The gate duration
// is fixed by the guess grid.
OptimizeResult optimize(const SystemParams& params, const ControlSet& guess,
                        const Mat16& target, const EnsembleSpec& ensemble,
                        const KrotovConfig& config);

}  // namespace ryd

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydsim/controls.hpp"
#include "rydsim/metrics.hpp"
#include "rydsim/system.hpp"

namespace ryd {

struct NoiseSpec {
    double sigma_time = 0.0;  // ns
    double sigma_amp = 0.0;   // fraction of the original amplitudes
    double sigma_ryd = 0.0;   // rad/ns
    int n_samples = 1000;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class NoiseAxis { Time, Amp, Ryd };

const char* noise_axis_name(NoiseAxis a);
NoiseAxis noise_axis_from_name(const std::string& s);

struct MeanFidelity {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Monte-Carlo expectation of the gate fidelity with one fluctuation axis
// active: draws n_samples offsets from N(0, sigma^2), perturbs the system,
// propagates unitarily and averages Eq.-(6)-style fidelities against the
// target. Deterministic given rng_seed; sample j of axis sweep reuses the
// same standard-normal draw for every sigma.
MeanFidelity mean_fidelity(const SystemParams& params, const ControlSet& controls,
                           const Eigen::Matrix4cd& target, const NoiseSpec& spec,
                           NoiseAxis axis, int n_jobs = 0);

struct RobustnessCurve {
    std::vector<double> sigma;
    std::vector<double> mean;
    std::vector<double> stderr_;

    void save_csv(const std::string& path, const std::string& sigma_header) const;
};

RobustnessCurve robustness_sweep(const SystemParams& params,
                                 const ControlSet& controls,
                                 const Eigen::Matrix4cd& target,
                                 const std::vector<double>& sigma_values,
                                 NoiseAxis axis, const NoiseSpec& spec,
                                 int n_jobs = 0);

namespace detail {
// Deterministic standard normal for sample index j under the given seed
// (splitmix64 + Box-Muller), shared across sweep points.
double standard_normal(std::uint64_t seed, std::uint64_t index);
}

}  // namespace ryd

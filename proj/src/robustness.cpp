#include "rydsim/robustness.hpp"

#include <cmath>
#include <stdexcept>

#include "rydsim/csv.hpp"
#include "rydsim/parallel.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/units.hpp"

namespace ryd {

void NoiseSpec::validate() const {
    if (sigma_time < 0.0 || sigma_amp < 0.0 || sigma_ryd < 0.0)
        throw std::invalid_argument("NoiseSpec: negative sigma");
    if (n_samples < 1) throw std::invalid_argument("NoiseSpec: n_samples must be >= 1");
}

const char* noise_axis_name(NoiseAxis a) {
    switch (a) {
        case NoiseAxis::Time: return "time";
        case NoiseAxis::Amp: return "amp";
        case NoiseAxis::Ryd: return "ryd";
    }
    return "?";
}

NoiseAxis noise_axis_from_name(const std::string& s) {
    for (NoiseAxis a : {NoiseAxis::Time, NoiseAxis::Amp, NoiseAxis::Ryd})
        if (s == noise_axis_name(a)) return a;
    throw std::invalid_argument("unknown noise axis: " + s);
}

namespace detail {

namespace {
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

double standard_normal(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    double u1 = (a >> 11) * 0x1.0p-53;
    double u2 = (b >> 11) * 0x1.0p-53;
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace detail

namespace {

Perturbation axis_perturbation(NoiseAxis axis, double offset) {
    Perturbation p;
    switch (axis) {
        case NoiseAxis::Time: p.delta_time = offset; break;
        case NoiseAxis::Amp:
            // offsets are fractions of the original amplitudes
            p.amp_scale = std::max(1.0 + offset, 1e-6);
            break;
        case NoiseAxis::Ryd: p.delta_ryd = offset; break;
    }
    return p;
}

double axis_sigma(const NoiseSpec& spec, NoiseAxis axis) {
    switch (axis) {
        case NoiseAxis::Time: return spec.sigma_time;
        case NoiseAxis::Amp: return spec.sigma_amp;
        case NoiseAxis::Ryd: return spec.sigma_ryd;
    }
    return 0.0;
}

}  // namespace

MeanFidelity mean_fidelity(const SystemParams& params, const ControlSet& controls,
                           const Eigen::Matrix4cd& target, const NoiseSpec& spec,
                           NoiseAxis axis, int n_jobs) {
    spec.validate();
    params.validate();
    double sigma = axis_sigma(spec, axis);
    if (sigma == 0.0) {
        double f = gate_fidelity(logical_evolution_map(params, controls), target);
        return {f, 0.0};
    }
    std::vector<double> fid(spec.n_samples);
    parallel_for(spec.n_samples, n_jobs, [&](int j) {
        double offset = sigma * detail::standard_normal(spec.rng_seed, j);
        auto [p, c] = apply_perturbation(params, controls, axis_perturbation(axis, offset));
        fid[j] = gate_fidelity(logical_evolution_map(p, c), target);
    });
    double mean = 0.0;
    for (double f : fid) mean += f;
    mean /= spec.n_samples;
    double var = 0.0;
    for (double f : fid) var += (f - mean) * (f - mean);
    double se = spec.n_samples > 1
                    ? std::sqrt(var / (double(spec.n_samples) * (spec.n_samples - 1)))
                    : 0.0;
    return {mean, se};
}

void RobustnessCurve::save_csv(const std::string& path,
                               const std::string& sigma_header) const {
    CsvWriter csv(path, {sigma_header, "mean_fidelity", "stderr"});
    for (size_t i = 0; i < sigma.size(); ++i)
        csv.write_row({sigma[i], mean[i], stderr_[i]});
}

RobustnessCurve robustness_sweep(const SystemParams& params, const ControlSet& controls,
                                 const Eigen::Matrix4cd& target,
                                 const std::vector<double>& sigma_values, NoiseAxis axis,
                                 const NoiseSpec& spec, int n_jobs) {
    for (size_t i = 1; i < sigma_values.size(); ++i)
        if (sigma_values[i] < sigma_values[i - 1])
            throw std::invalid_argument("sigma values must be sorted ascending");
    RobustnessCurve curve;
    for (double s : sigma_values) {
        NoiseSpec point = spec;
        switch (axis) {
            case NoiseAxis::Time: point.sigma_time = s; break;
            case NoiseAxis::Amp: point.sigma_amp = s; break;
            case NoiseAxis::Ryd: point.sigma_ryd = s; break;
        }
        auto mf = mean_fidelity(params, controls, target, point, axis, n_jobs);
        curve.sigma.push_back(s);
        curve.mean.push_back(mf.mean);
        curve.stderr_.push_back(mf.stderr_);
    }
    return curve;
}

}  // namespace ryd

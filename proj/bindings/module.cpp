#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rydsim/krotov.hpp"
#include "rydsim/metrics.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/pulses.hpp"
#include "rydsim/robustness.hpp"
#include "rydsim/scenario.hpp"
#include "rydsim/system.hpp"
#include "rydsim/units.hpp"

namespace py = pybind11;
using namespace ryd;

namespace {

ControlSet controls_from_arrays(double t_start, double t_stop,
                                const std::vector<Eigen::VectorXcd>& channels) {
    if (channels.size() != 4)
        throw std::invalid_argument("expected 4 control channels");
    TimeGrid grid(t_start, t_stop, static_cast<int>(channels[0].size()));
    ControlSet out(grid);
    for (int c = 0; c < 4; ++c) {
        if (channels[c].size() != grid.n_steps)
            throw std::invalid_argument("channel lengths differ");
        out.channel(static_cast<Channel>(c)) = channels[c];
    }
    out.check_finite();
    return out;
}

py::dict trajectory_to_dict(const Trajectory& traj) {
    py::dict d;
    d["t_ns"] = traj.times;
    for (const auto& [name, values] : traj.columns) d[name.c_str()] = values;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-qubit Rydberg-blockade CPHASE gate simulation and optimal control";

    m.attr("__version__") = tool_version;

    m.def("angular_from_mhz", &angular_from_mhz, py::arg("f_mhz"));
    m.def("angular_from_ghz", &angular_from_ghz, py::arg("f_ghz"));
    m.def("mhz_from_angular", &mhz_from_angular, py::arg("w"));

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("delta1", &SystemParams::delta1)
        .def_readwrite("delta2", &SystemParams::delta2)
        .def_readwrite("e1", &SystemParams::e1)
        .def_readwrite("u", &SystemParams::u)
        .def_readwrite("tau_i", &SystemParams::tau_i)
        .def_readwrite("atom_separation", &SystemParams::atom_separation)
        .def("validate", &SystemParams::validate);

    py::class_<Perturbation>(m, "Perturbation")
        .def(py::init<>())
        .def(py::init([](double delta_ryd, double amp_scale, double delta_time) {
                 return Perturbation{delta_ryd, amp_scale, delta_time};
             }),
             py::arg("delta_ryd") = 0.0, py::arg("amp_scale") = 1.0,
             py::arg("delta_time") = 0.0)
        .def_readwrite("delta_ryd", &Perturbation::delta_ryd)
        .def_readwrite("amp_scale", &Perturbation::amp_scale)
        .def_readwrite("delta_time", &Perturbation::delta_time);

    py::enum_<Channel>(m, "Channel")
        .value("BLUE_LEFT", Channel::BlueLeft)
        .value("RED_LEFT", Channel::RedLeft)
        .value("BLUE_RIGHT", Channel::BlueRight)
        .value("RED_RIGHT", Channel::RedRight);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, double, int>(), py::arg("t_start"), py::arg("t_stop"),
             py::arg("n_steps"))
        .def_readonly("t_start", &TimeGrid::t_start)
        .def_readonly("t_stop", &TimeGrid::t_stop)
        .def_readonly("n_steps", &TimeGrid::n_steps)
        .def("dt", &TimeGrid::dt)
        .def("midpoint", &TimeGrid::midpoint);

    py::class_<ControlSet>(m, "ControlSet")
        .def(py::init(&controls_from_arrays), py::arg("t_start"), py::arg("t_stop"),
             py::arg("channels"))
        .def_property_readonly("grid", &ControlSet::grid)
        .def("channel",
             [](const ControlSet& cs, Channel c) { return cs.channel(c); })
        .def("peak_amplitude",
             [](const ControlSet& cs) { return cs.peak_amplitude(); })
        .def("scaled", &ControlSet::scaled)
        .def("right_shifted", &ControlSet::right_shifted)
        .def("resampled", &ControlSet::resampled)
        .def("save_csv", &ControlSet::save_csv)
        .def_static("load_csv", &ControlSet::load_csv);

    m.def("build_h1q", &build_h1q, py::arg("params"), py::arg("omega_b"),
          py::arg("omega_r"));
    m.def(
        "build_h2q",
        [](const SystemParams& p, complexd bl, complexd rl, complexd br, complexd rr) {
            return build_h2q(p, ControlSample{bl, rl, br, rr});
        },
        py::arg("params"), py::arg("blue_left"), py::arg("red_left"),
        py::arg("blue_right"), py::arg("red_right"));
    m.def("apply_perturbation", &apply_perturbation, py::arg("params"),
          py::arg("controls"), py::arg("perturbation"));

    m.def("blackman", &blackman, py::arg("t"), py::arg("t0"), py::arg("duration"),
          py::arg("peak"));

    py::class_<PulseSchedule>(m, "PulseSchedule")
        .def_readonly("total_time", &PulseSchedule::total_time)
        .def("envelope", &PulseSchedule::envelope);

    m.def("make_simultaneous", &make_simultaneous, py::arg("t_pi"), py::arg("t_2pi"),
          py::arg("amp_pi"), py::arg("amp_2pi"));
    m.def("make_stirap", &make_stirap, py::arg("t_left"), py::arg("t_right"),
          py::arg("amp_left"), py::arg("amp_right"), py::arg("delay_fraction"));
    m.def("make_mixed", &make_mixed, py::arg("t_left"), py::arg("t_right"),
          py::arg("overlap"), py::arg("amp_left"), py::arg("amp_right"),
          py::arg("delay_fraction"));
    m.def("render", &render, py::arg("schedule"), py::arg("n_steps"));
    m.def(
        "calibrate_pi_amplitude",
        [](const SystemParams& p, double t_pi) { return calibrate_pi_amplitude(p, t_pi); },
        py::arg("params"), py::arg("t_pi"));
    m.def(
        "calibrate_2pi_amplitude",
        [](const SystemParams& p, double t) { return calibrate_2pi_amplitude(p, t); },
        py::arg("params"), py::arg("t_2pi"));

    m.def(
        "spectrum",
        [](const ControlSet& cs, Channel c) {
            Spectrum sp = spectrum(cs, c);
            return py::make_tuple(sp.omega, sp.magnitude);
        },
        py::arg("controls"), py::arg("channel"));

    m.def(
        "propagate_state",
        [](const SystemParams& p, const ControlSet& cs, const Vec16& initial) {
            auto [state, traj] = propagate_state(p, cs, initial);
            return py::make_tuple(state, trajectory_to_dict(traj));
        },
        py::arg("params"), py::arg("controls"), py::arg("initial"));
    m.def(
        "propagate_propagator",
        [](const SystemParams& p, const ControlSet& cs) {
            return propagate_propagator(p, cs);
        },
        py::arg("params"), py::arg("controls"));
    m.def(
        "logical_evolution_map",
        [](const SystemParams& p, const ControlSet& cs) {
            return logical_evolution_map(p, cs);
        },
        py::arg("params"), py::arg("controls"));
    m.def(
        "propagate_lindblad",
        [](const SystemParams& p, const ControlSet& cs, const Mat16& initial,
           int composition_order) {
            PropagationOptions opts;
            opts.composition_order = composition_order;
            auto [rho, traj] = propagate_lindblad(p, cs, initial, {}, opts);
            return py::make_tuple(rho, trajectory_to_dict(traj));
        },
        py::arg("params"), py::arg("controls"), py::arg("initial"),
        py::arg("composition_order") = 6);

    m.def("gate_fidelity", &gate_fidelity, py::arg("u"), py::arg("target"));
    m.def("cphase_target", &cphase_target, py::arg("phi"), py::arg("e1_phase"));
    m.def("embed_logical", &embed_logical, py::arg("u"));

    py::enum_<NoiseAxis>(m, "NoiseAxis")
        .value("TIME", NoiseAxis::Time)
        .value("AMP", NoiseAxis::Amp)
        .value("RYD", NoiseAxis::Ryd);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def(py::init<>())
        .def_readwrite("sigma_time", &NoiseSpec::sigma_time)
        .def_readwrite("sigma_amp", &NoiseSpec::sigma_amp)
        .def_readwrite("sigma_ryd", &NoiseSpec::sigma_ryd)
        .def_readwrite("n_samples", &NoiseSpec::n_samples)
        .def_readwrite("rng_seed", &NoiseSpec::rng_seed);

    m.def(
        "mean_fidelity",
        [](const SystemParams& p, const ControlSet& cs, const Eigen::Matrix4cd& target,
           const NoiseSpec& spec, NoiseAxis axis, int n_jobs) {
            auto mf = mean_fidelity(p, cs, target, spec, axis, n_jobs);
            return py::make_tuple(mf.mean, mf.stderr_);
        },
        py::arg("params"), py::arg("controls"), py::arg("target"), py::arg("spec"),
        py::arg("axis"), py::arg("n_jobs") = 0);
    m.def(
        "robustness_sweep",
        [](const SystemParams& p, const ControlSet& cs, const Eigen::Matrix4cd& target,
           const std::vector<double>& sigmas, NoiseAxis axis, const NoiseSpec& spec,
           int n_jobs) {
            auto curve = robustness_sweep(p, cs, target, sigmas, axis, spec, n_jobs);
            return py::make_tuple(curve.sigma, curve.mean, curve.stderr_);
        },
        py::arg("params"), py::arg("controls"), py::arg("target"), py::arg("sigmas"),
        py::arg("axis"), py::arg("spec"), py::arg("n_jobs") = 0);

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init<>())
        .def_readwrite("n_members", &EnsembleSpec::n_members)
        .def_readwrite("ryd_range", &EnsembleSpec::ryd_range)
        .def_readwrite("amp_range", &EnsembleSpec::amp_range)
        .def("members", &EnsembleSpec::members);

    py::class_<KrotovConfig>(m, "KrotovConfig")
        .def(py::init<>())
        .def_readwrite("lambda_auto_fraction", &KrotovConfig::lambda_auto_fraction)
        .def_readwrite("max_iters", &KrotovConfig::max_iters)
        .def_readwrite("j_tol", &KrotovConfig::j_tol)
        .def_readwrite("normalize_fidelity", &KrotovConfig::normalize_fidelity)
        .def_readwrite("n_jobs", &KrotovConfig::n_jobs)
        .def_readwrite("verbose", &KrotovConfig::verbose)
        .def_property(
            "lambda_",
            [](const KrotovConfig& c) {
                return std::vector<double>(c.lambda.begin(), c.lambda.end());
            },
            [](KrotovConfig& c, const std::vector<double>& v) {
                if (v.size() != 4)
                    throw std::invalid_argument("lambda needs 4 entries");
                std::copy(v.begin(), v.end(), c.lambda.begin());
            });

    py::class_<IterationStats>(m, "IterationStats")
        .def_readonly("iter", &IterationStats::iter)
        .def_readonly("j_total", &IterationStats::j_total)
        .def_readonly("fidelity_term", &IterationStats::fidelity_term)
        .def_readonly("penalty_term", &IterationStats::penalty_term)
        .def_readonly("member_errors", &IterationStats::member_errors)
        .def_readonly("worst_member_error", &IterationStats::worst_member_error)
        .def_readonly("wall_seconds", &IterationStats::wall_seconds);

    m.def(
        "optimize",
        [](const SystemParams& p, const ControlSet& guess, const Mat16& target,
           const EnsembleSpec& ensemble, const KrotovConfig& config) {
            auto result = optimize(p, guess, target, ensemble, config);
            return py::make_tuple(result.controls, result.record.iterations);
        },
        py::arg("params"), py::arg("guess"), py::arg("target"), py::arg("ensemble"),
        py::arg("config"));

    m.def(
        "run_scenario",
        [](const std::string& config_path, const std::string& output_dir, int jobs,
           long long seed) {
            RunOptions opts;
            opts.output_dir = output_dir;
            opts.jobs = jobs;
            opts.seed = seed;
            return run_scenario(config_path, opts);
        },
        py::arg("config_path"), py::arg("output_dir") = "", py::arg("jobs") = -1,
        py::arg("seed") = -1);
}

#include "rydsim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>

#include <json.hpp>

#include "rydsim/csv.hpp"
#include "rydsim/krotov.hpp"
#include "rydsim/metrics.hpp"
#include "rydsim/parallel.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/pulses.hpp"
#include "rydsim/robustness.hpp"
#include "rydsim/units.hpp"

namespace ryd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
    require_object(j, where);
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

double get_number(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::optional<double> get_optional_number(const json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

long long get_integer(const json& j, const std::string& key, long long fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_number_integer())
        throw ConfigError("'" + key + "' must be an integer");
    return j.at(key).get<long long>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& key,
                       const std::string& fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_string()) throw ConfigError("'" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

std::vector<double> get_number_list(const json& j, const std::string& key,
                                    std::vector<double> fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError("'" + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::string> get_string_list(const json& j, const std::string& key,
                                         std::vector<std::string> fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_string()) throw ConfigError("'" + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

// --set key.path=value
void apply_override(json& config, const std::string& expr) {
    auto eq = expr.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: " + expr);
    std::string path = expr.substr(0, eq);
    std::string raw = expr.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // plain string
    }
    json* node = &config;
    size_t pos = 0;
    while (true) {
        size_t dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

SystemParams parse_params(const json& config) {
    SystemParams p;
    if (!config.contains("params")) return p;
    const json& j = config.at("params");
    check_keys(j, "params",
               {"delta1_ghz", "delta2_mhz", "e1_ghz", "u_mhz", "tau_ns",
                "atom_separation_um"});
    p.delta1 = angular_from_ghz(get_number(j, "delta1_ghz", 1.273));
    p.delta2 = angular_from_mhz(get_number(j, "delta2_mhz", 0.0));
    p.e1 = angular_from_ghz(get_number(j, "e1_ghz", 9.100));
    p.u = angular_from_mhz(get_number(j, "u_mhz", 57.26));
    p.tau_i = get_number(j, "tau_ns", 150.0);
    p.atom_separation = get_number(j, "atom_separation_um", 5.0);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return p;
}

struct ScheduleSpec {
    std::string scheme;
    json raw;
};

PulseShape shape_from_name(const std::string& s) {
    if (s == "blackman") return PulseShape::Blackman;
    if (s == "gaussian") return PulseShape::Gaussian;
    throw ConfigError("unknown pulse shape: " + s);
}

// Builds the schedule, running amplitude calibrations for amplitudes the
// config leaves unset.
PulseSchedule build_schedule(const json& sched, const SystemParams& params) {
    std::string scheme = get_string(sched, "scheme", "");
    if (scheme.empty()) throw ConfigError("schedule.scheme is required");
    try {
        if (scheme == "simultaneous") {
            check_keys(sched, "schedule",
                       {"scheme", "t_pi_ns", "t_2pi_ns", "amp_pi_mhz", "amp_2pi_mhz"});
            double t_pi = get_number(sched, "t_pi_ns", 50.0);
            double t_2pi = get_number(sched, "t_2pi_ns", 800.0);
            auto amp_pi = get_optional_number(sched, "amp_pi_mhz");
            auto amp_2pi = get_optional_number(sched, "amp_2pi_mhz");
            double a1 = amp_pi ? angular_from_mhz(*amp_pi)
                               : calibrate_pi_amplitude(params, t_pi);
            double a2 = amp_2pi ? angular_from_mhz(*amp_2pi)
                                : calibrate_2pi_amplitude(params, t_2pi);
            return make_simultaneous(t_pi, t_2pi, a1, a2);
        }
        if (scheme == "stirap") {
            check_keys(sched, "schedule",
                       {"scheme", "t_left_ns", "t_right_ns", "amp_left_mhz",
                        "amp_right_mhz", "delay_fraction"});
            double t_left = get_number(sched, "t_left_ns", 300.0);
            double t_right = get_number(sched, "t_right_ns", 4000.0);
            double delay = get_number(sched, "delay_fraction", 0.3);
            auto amp_left = get_optional_number(sched, "amp_left_mhz");
            auto amp_right = get_optional_number(sched, "amp_right_mhz");
            if (!amp_right)
                throw ConfigError("stirap schedule requires amp_right_mhz");
            double al = amp_left ? angular_from_mhz(*amp_left)
                                 : calibrate_stirap_pi_amplitude(params, t_left, delay);
            return make_stirap(t_left, t_right, al, angular_from_mhz(*amp_right), delay);
        }
        if (scheme == "mixed") {
            check_keys(sched, "schedule",
                       {"scheme", "t_left_ns", "t_right_ns", "overlap_ns",
                        "amp_left_mhz", "amp_right_mhz", "delay_fraction"});
            double t_left = get_number(sched, "t_left_ns", 250.0);
            double t_right = get_number(sched, "t_right_ns", 800.0);
            double overlap = get_number(sched, "overlap_ns", 250.0);
            double delay = get_number(sched, "delay_fraction", 0.3);
            auto amp_left = get_optional_number(sched, "amp_left_mhz");
            auto amp_right = get_optional_number(sched, "amp_right_mhz");
            double al = amp_left ? angular_from_mhz(*amp_left)
                                 : calibrate_stirap_pi_amplitude(params, t_left, delay);
            double ar = amp_right ? angular_from_mhz(*amp_right)
                                  : calibrate_2pi_amplitude(params, t_right);
            return make_mixed(t_left, t_right, overlap, al, ar, delay);
        }
        if (scheme == "guess") {
            // analytic-scheme-inspired optimization guess: pi pairs on the
            // left atom at both ends, one 2pi pair on the right spanning the
            // whole window
            check_keys(sched, "schedule",
                       {"scheme", "total_time_ns", "t_pi_ns", "amp_pi_mhz",
                        "amp_2pi_mhz"});
            double total = get_number(sched, "total_time_ns", 800.0);
            double t_pi = get_number(sched, "t_pi_ns", total / 4.0);
            if (2.0 * t_pi > total)
                throw ConfigError("guess schedule: 2 t_pi exceeds total_time");
            auto amp_pi = get_optional_number(sched, "amp_pi_mhz");
            auto amp_2pi = get_optional_number(sched, "amp_2pi_mhz");
            double a1 = amp_pi ? angular_from_mhz(*amp_pi)
                               : calibrate_pi_amplitude(params, t_pi);
            double a2 = amp_2pi ? angular_from_mhz(*amp_2pi)
                                : calibrate_2pi_amplitude(params, total);
            PulseSchedule s;
            s.scheme = Scheme::Custom;
            s.total_time = total;
            s.pulses.push_back({PulseShape::Blackman, Channel::BlueLeft, 0, t_pi, a1, 0, 0});
            s.pulses.push_back({PulseShape::Blackman, Channel::RedLeft, 0, t_pi, a1, 0, 0});
            s.pulses.push_back({PulseShape::Blackman, Channel::BlueLeft, total - t_pi,
                                t_pi, a1, 0, 0});
            s.pulses.push_back({PulseShape::Blackman, Channel::RedLeft, total - t_pi,
                                t_pi, a1, 0, 0});
            s.pulses.push_back({PulseShape::Blackman, Channel::BlueRight, 0, total, a2, 0, 0});
            s.pulses.push_back({PulseShape::Blackman, Channel::RedRight, 0, total, a2, 0, 0});
            s.validate();
            return s;
        }
        if (scheme == "custom") {
            check_keys(sched, "schedule", {"scheme", "total_time_ns", "pulses"});
            PulseSchedule s;
            s.scheme = Scheme::Custom;
            s.total_time = get_number(sched, "total_time_ns", 0.0);
            if (!sched.contains("pulses") || !sched.at("pulses").is_array())
                throw ConfigError("custom schedule needs a pulses array");
            for (const auto& p : sched.at("pulses")) {
                check_keys(p, "schedule.pulses[]",
                           {"shape", "channel", "start_ns", "duration_ns", "peak_mhz",
                            "center_ns", "sigma_ns"});
                SubPulse sp;
                sp.shape = shape_from_name(get_string(p, "shape", "blackman"));
                sp.channel = channel_from_name(get_string(p, "channel", ""));
                sp.start = get_number(p, "start_ns", 0.0);
                sp.duration = get_number(p, "duration_ns", 0.0);
                sp.peak = angular_from_mhz(get_number(p, "peak_mhz", 0.0));
                sp.center = get_number(p, "center_ns", sp.start + 0.5 * sp.duration);
                sp.sigma = get_number(p, "sigma_ns", sp.duration / 6.0);
                s.pulses.push_back(sp);
            }
            s.validate();
            return s;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }
    throw ConfigError("unknown schedule scheme: " + scheme);
}

struct ResolvedScenario {
    json config;
    std::string kind;
    SystemParams params;
    int n_steps = 2000;
    int jobs = 0;
    std::uint64_t seed = 0;
    fs::path out_dir;
};

TrajectorySpec parse_observables(const json& config) {
    TrajectorySpec spec;
    spec.states = {"00", "01", "10", "11", "r0", "0r", "rr", "1r", "r1"};
    spec.intermediate = true;
    spec.phase_states = {"00", "01", "10", "11"};
    if (!config.contains("observables")) return spec;
    const json& j = config.at("observables");
    check_keys(j, "observables", {"stride", "states", "intermediate", "phases"});
    spec.stride = static_cast<int>(get_integer(j, "stride", 1));
    spec.states = get_string_list(j, "states", spec.states);
    spec.intermediate = get_bool(j, "intermediate", spec.intermediate);
    spec.phase_states = get_string_list(j, "phases", spec.phase_states);
    return spec;
}

NoiseSpec parse_noise(const json& config, std::uint64_t seed) {
    NoiseSpec n;
    n.rng_seed = seed;
    if (!config.contains("noise")) return n;
    const json& j = config.at("noise");
    check_keys(j, "noise", {"sigma_time_ns", "sigma_amp", "sigma_ryd_khz", "n_samples"});
    n.sigma_time = get_number(j, "sigma_time_ns", 0.0);
    n.sigma_amp = get_number(j, "sigma_amp", 0.0);
    n.sigma_ryd = angular_from_khz(get_number(j, "sigma_ryd_khz", 0.0));
    n.n_samples = static_cast<int>(get_integer(j, "n_samples", 1000));
    try {
        n.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return n;
}

EnsembleSpec parse_ensemble(const json& config) {
    EnsembleSpec e;
    if (!config.contains("ensemble")) return e;
    const json& j = config.at("ensemble");
    check_keys(j, "ensemble", {"n_members", "ryd_range_khz", "amp_range"});
    e.n_members = static_cast<int>(get_integer(j, "n_members", 24));
    e.ryd_range = angular_from_khz(get_number(j, "ryd_range_khz", 300.0));
    e.amp_range = get_number(j, "amp_range", 0.05);
    try {
        e.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
    return e;
}

KrotovConfig parse_krotov(const json& config, int jobs) {
    KrotovConfig k;
    k.n_jobs = jobs;
    if (!config.contains("krotov")) return k;
    const json& j = config.at("krotov");
    check_keys(j, "krotov",
               {"max_iters", "lambda", "lambda_auto_fraction", "j_tol",
                "normalize_fidelity", "verbose"});
    k.max_iters = static_cast<int>(get_integer(j, "max_iters", 100));
    if (j.contains("lambda") && !j.at("lambda").is_null()) {
        if (j.at("lambda").is_number()) {
            k.lambda.fill(j.at("lambda").get<double>());
        } else if (j.at("lambda").is_array() && j.at("lambda").size() == 4) {
            for (int c = 0; c < 4; ++c) k.lambda[c] = j.at("lambda")[c].get<double>();
        } else {
            throw ConfigError("krotov.lambda must be a number or an array of 4");
        }
    }
    k.lambda_auto_fraction = get_number(j, "lambda_auto_fraction", 0.01);
    k.j_tol = get_number(j, "j_tol", 0.0);
    k.normalize_fidelity = get_bool(j, "normalize_fidelity", true);
    k.verbose = get_bool(j, "verbose", false);
    try {
        k.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
    return k;
}

// Resolve the controls: either a rendered schedule or a pulse dump.
ControlSet resolve_controls(const ResolvedScenario& rs, PulseSchedule* schedule_out) {
    bool has_schedule = rs.config.contains("schedule");
    bool has_dump = rs.config.contains("pulse_dump");
    if (has_schedule == has_dump)
        throw ConfigError("exactly one of schedule / pulse_dump is required");
    if (has_dump) {
        std::string path = rs.config.at("pulse_dump").get<std::string>();
        try {
            return ControlSet::load_csv(path);
        } catch (const std::exception& e) {
            throw IoError(e.what());
        }
    }
    PulseSchedule schedule = build_schedule(rs.config.at("schedule"), rs.params);
    if (schedule_out) *schedule_out = schedule;
    return render(schedule, rs.n_steps);
}

Eigen::Matrix4cd resolve_target(const ResolvedScenario& rs, double total_time) {
    double phi_over_pi = 1.0;
    if (rs.config.contains("target")) {
        const json& j = rs.config.at("target");
        check_keys(j, "target", {"phi_over_pi"});
        phi_over_pi = get_number(j, "phi_over_pi", 1.0);
    }
    return cphase_target(phi_over_pi * std::numbers::pi, rs.params.e1 * total_time);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void write_manifest(const ResolvedScenario& rs) {
    json manifest;
    manifest["tool"] = "rydsim";
    manifest["version"] = tool_version;
    manifest["seed"] = rs.seed;
    manifest["config"] = rs.config;
    write_text(rs.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_spectra(const ControlSet& controls, const fs::path& dir) {
    for (Channel c : all_channels) {
        Spectrum sp = spectrum(controls, c);
        CsvWriter csv((dir / (std::string("spectrum_") + channel_name(c) + ".csv")).string(),
                      {"freq_mhz", "magnitude"});
        for (Eigen::Index i = 0; i < sp.omega.size(); ++i)
            csv.write_row({mhz_from_angular(sp.omega(i)), sp.magnitude(i)});
    }
}

GateReport gate_report_for(const SystemParams& params, const ControlSet& controls,
                           const Eigen::Matrix4cd& target) {
    TrajectorySpec spec;
    spec.states = {"rr", "0i", "1r"};
    LogicalRun run = propagate_logical(params, controls, spec);
    GateReport rep;
    rep.fidelity = gate_fidelity(run.map, target);
    rep.error = 1.0 - rep.fidelity;
    rep.leakage = (run.map.adjoint() * run.map - Eigen::Matrix4cd::Identity()).norm();
    rep.blockade_efficiency = blockade_efficiency(run.trajectories[2], run.trajectories[0]);
    rep.peaks["rr"] = run.trajectories[0].column_max("P_rr");
    rep.peaks["0i"] = run.trajectories[0].column_max("P_0i");
    rep.peaks["1r"] = run.trajectories[2].column_max("P_1r");
    return rep;
}

std::string regime_json(const RegimeReport& r) {
    json j;
    for (int c = 0; c < 4; ++c) {
        json ch;
        ch["peak_mhz"] = mhz_from_angular(r.peak[c]);
        ch["blockade_ratio"] = r.blockade_ratio[c];
        ch["elimination_ratio"] = r.elimination_ratio[c];
        j["channels"][channel_name(static_cast<Channel>(c))] = ch;
    }
    j["blockade_ok"] = r.blockade_ok;
    j["elimination_ok"] = r.elimination_ok;
    j["overlap_time_ns"] = {r.overlap_time[0], r.overlap_time[1]};
    j["adiabaticity_product"] = {r.adiabaticity[0], r.adiabaticity[1]};
    j["adiabatic_ok"] = r.adiabatic_ok;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- simulate

void run_simulate(const ResolvedScenario& rs) {
    std::string method = "unitary";
    int comp_order = 6;
    if (rs.config.contains("propagation")) {
        const json& j = rs.config.at("propagation");
        check_keys(j, "propagation", {"method", "composition_order"});
        method = get_string(j, "method", "unitary");
        comp_order = static_cast<int>(get_integer(j, "composition_order", 6));
        if (method != "unitary" && method != "lindblad")
            throw ConfigError("propagation.method must be unitary or lindblad");
    }
    TrajectorySpec spec = parse_observables(rs.config);
    auto initial = get_string_list(rs.config, "initial_states", {"00", "01", "10", "11"});
    std::vector<int> initial_idx;
    for (const auto& label : initial) {
        try {
            initial_idx.push_back(basis::pair_from_label(label));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    ControlSet controls = resolve_controls(rs, nullptr);
    Eigen::Matrix4cd target = resolve_target(rs, controls.grid().span());

    controls.save_csv((rs.out_dir / "pulses.csv").string());
    for (size_t s = 0; s < initial.size(); ++s) {
        const std::string& label = initial[s];
        int idx = initial_idx[s];
        Trajectory traj;
        if (method == "unitary") {
            Vec16 psi = Vec16::Zero();
            psi(idx) = 1.0;
            traj = propagate_state(rs.params, controls, psi, spec).second;
        } else {
            Mat16 rho = Mat16::Zero();
            rho(idx, idx) = 1.0;
            PropagationOptions opts;
            opts.composition_order = comp_order;
            traj = propagate_lindblad(rs.params, controls, rho, spec, opts).second;
        }
        traj.save_csv((rs.out_dir / ("trajectory_" + label + ".csv")).string());
    }
    GateReport rep = gate_report_for(rs.params, controls, target);
    write_text(rs.out_dir / "gate_report.json", rep.to_json());
    write_text(rs.out_dir / "regime.json",
               regime_json(regime_diagnostics(rs.params, controls)));
    if (get_bool(rs.config, "spectra", false)) write_spectra(controls, rs.out_dir);
}

// ---------------------------------------------------------- speed limit scan

void run_speed_limit_scan(const ResolvedScenario& rs) {
    json scan = rs.config.contains("scan") ? rs.config.at("scan") : json::object();
    check_keys(scan, "scan", {"t_pi_ns", "t_2pi_values_ns"});
    double t_pi = get_number(scan, "t_pi_ns", 50.0);
    std::vector<double> t_values = get_number_list(
        scan, "t_2pi_values_ns", {200, 283, 400, 566, 800, 1131, 1600});
    double amp_pi = calibrate_pi_amplitude(rs.params, t_pi);

    struct Row {
        double t_2pi, error, max_rr, max_0i;
    };
    std::vector<Row> rows(t_values.size());
    parallel_for(static_cast<int>(t_values.size()), rs.jobs, [&](int i) {
        double t_2pi = t_values[i];
        double amp_2pi = calibrate_2pi_amplitude(rs.params, t_2pi);
        ControlSet controls =
            render(make_simultaneous(t_pi, t_2pi, amp_pi, amp_2pi), rs.n_steps);
        Eigen::Matrix4cd target =
            cphase_target(std::numbers::pi, rs.params.e1 * controls.grid().span());
        double error = 1.0 - gate_fidelity(logical_evolution_map(rs.params, controls),
                                           target);
        // breakdown diagnostics over the central window alone: blockade
        // breaking seen from |r0>, loss of adiabatic elimination from |00>
        PulseSchedule central;
        central.scheme = Scheme::Custom;
        central.total_time = t_2pi;
        central.pulses.push_back(
            {PulseShape::Blackman, Channel::BlueRight, 0.0, t_2pi, amp_2pi, 0, 0});
        central.pulses.push_back(
            {PulseShape::Blackman, Channel::RedRight, 0.0, t_2pi, amp_2pi, 0, 0});
        ControlSet central_controls = render(central, rs.n_steps);
        TrajectorySpec spec;
        spec.states = {"rr", "0i"};
        Vec16 r0 = Vec16::Zero();
        r0(basis::pair_from_label("r0")) = 1.0;
        Trajectory traj_r0 =
            propagate_state(rs.params, central_controls, r0, spec).second;
        Vec16 v00 = Vec16::Zero();
        v00(0) = 1.0;
        Trajectory traj_00 =
            propagate_state(rs.params, central_controls, v00, spec).second;
        rows[i] = Row{t_2pi, error, traj_r0.column_max("P_rr"),
                      traj_00.column_max("P_0i")};
    });
    CsvWriter csv((rs.out_dir / "speed_limit.csv").string(),
                  {"t_2pi_ns", "gate_error", "max_P_rr", "max_P_0i"});
    for (const auto& r : rows) csv.write_row({r.t_2pi, r.error, r.max_rr, r.max_0i});
}

// --------------------------------------------------- stirap amplitude scan

void run_stirap_amplitude_scan(const ResolvedScenario& rs) {
    if (!rs.config.contains("schedule"))
        throw ConfigError("stirap_amplitude_scan requires a stirap schedule");
    json sched = rs.config.at("schedule");
    if (get_string(sched, "scheme", "") != "stirap")
        throw ConfigError("stirap_amplitude_scan requires schedule.scheme = stirap");
    json scan = rs.config.contains("scan") ? rs.config.at("scan") : json::object();
    check_keys(scan, "scan", {"amp_values_mhz"});
    std::vector<double> amps = get_number_list(scan, "amp_values_mhz", {});
    if (amps.empty()) {
        for (int i = 0; i <= 40; ++i) amps.push_back(10.0 + i * 10.0);
    }

    double t_left = get_number(sched, "t_left_ns", 300.0);
    double t_right = get_number(sched, "t_right_ns", 4000.0);
    double delay = get_number(sched, "delay_fraction", 0.3);
    auto amp_left_cfg = get_optional_number(sched, "amp_left_mhz");
    double amp_left = amp_left_cfg
                          ? angular_from_mhz(*amp_left_cfg)
                          : calibrate_stirap_pi_amplitude(rs.params, t_left, delay);

    struct Row {
        double amp, b, fidelity, max_1r, final_1r, max_rr, final_rr;
    };
    std::vector<Row> rows(amps.size());
    parallel_for(static_cast<int>(amps.size()), rs.jobs, [&](int i) {
        ControlSet controls = render(
            make_stirap(t_left, t_right, amp_left, angular_from_mhz(amps[i]), delay),
            rs.n_steps);
        TrajectorySpec spec;
        spec.states = {"1r", "rr"};
        LogicalRun run = propagate_logical(rs.params, controls, spec);
        Eigen::Matrix4cd target =
            cphase_target(std::numbers::pi, rs.params.e1 * controls.grid().span());
        const Trajectory& traj00 = run.trajectories[0];
        const Trajectory& traj10 = run.trajectories[2];
        rows[i] = Row{amps[i],
                      blockade_efficiency(traj10, traj00),
                      gate_fidelity(run.map, target),
                      traj10.column_max("P_1r"),
                      traj10.column_final("P_1r"),
                      traj00.column_max("P_rr"),
                      traj00.column_final("P_rr")};
    });
    CsvWriter csv((rs.out_dir / "stirap_scan.csv").string(),
                  {"amp_mhz", "blockade_efficiency", "fidelity", "max_P_1r",
                   "final_P_1r", "max_P_rr", "final_P_rr"});
    for (const auto& r : rows)
        csv.write_row({r.amp, r.b, r.fidelity, r.max_1r, r.final_1r, r.max_rr,
                       r.final_rr});
}

// ----------------------------------------------------------- robustness

void run_robustness_sweep(const ResolvedScenario& rs) {
    NoiseSpec noise = parse_noise(rs.config, rs.seed);
    json rob = rs.config.contains("robustness") ? rs.config.at("robustness")
                                                : json::object();
    check_keys(rob, "robustness",
               {"axes", "sigma_ryd_khz", "sigma_amp", "sigma_time_ns"});
    auto axes = get_string_list(rob, "axes", {"ryd", "amp", "time"});
    std::vector<NoiseAxis> parsed_axes;
    for (const auto& axis_name : axes) {
        try {
            parsed_axes.push_back(noise_axis_from_name(axis_name));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    ControlSet controls = resolve_controls(rs, nullptr);
    Eigen::Matrix4cd target = resolve_target(rs, controls.grid().span());
    for (size_t ax = 0; ax < axes.size(); ++ax) {
        const std::string& axis_name = axes[ax];
        NoiseAxis axis = parsed_axes[ax];
        std::vector<double> sigmas;
        std::string header;
        switch (axis) {
            case NoiseAxis::Ryd: {
                auto khz = get_number_list(rob, "sigma_ryd_khz",
                                           {0, 100, 200, 300, 400, 500, 600});
                for (double v : khz) sigmas.push_back(angular_from_khz(v));
                header = "sigma_ryd_khz";
                break;
            }
            case NoiseAxis::Amp:
                sigmas = get_number_list(
                    rob, "sigma_amp", {0, 0.01, 0.02, 0.03, 0.04, 0.05});
                header = "sigma_amp";
                break;
            case NoiseAxis::Time:
                sigmas = get_number_list(rob, "sigma_time_ns", {0, 0.5, 1, 1.5, 2, 3});
                header = "sigma_time_ns";
                break;
        }
        RobustnessCurve curve =
            robustness_sweep(rs.params, controls, target, sigmas, axis, noise, rs.jobs);
        if (axis == NoiseAxis::Ryd)
            for (auto& s : curve.sigma) s = s / angular_from_khz(1.0);
        curve.save_csv((rs.out_dir / ("robustness_" + axis_name + ".csv")).string(),
                       header);
    }
}

// ------------------------------------------------------------- optimize

void run_optimize(const ResolvedScenario& rs) {
    ControlSet guess = resolve_controls(rs, nullptr);
    Eigen::Matrix4cd target4 = resolve_target(rs, guess.grid().span());
    Mat16 target = embed_logical(target4);
    EnsembleSpec ensemble = parse_ensemble(rs.config);
    KrotovConfig config = parse_krotov(rs.config, rs.jobs);

    guess.save_csv((rs.out_dir / "guess_pulses.csv").string());
    OptimizeResult result = optimize(rs.params, guess, target, ensemble, config);
    result.controls.save_csv((rs.out_dir / "optimized_pulses.csv").string());

    CsvWriter iters((rs.out_dir / "iterations.csv").string(),
                    {"iter", "j_total", "fidelity_term", "penalty_term",
                     "worst_member_error"});
    for (const auto& st : result.record.iterations)
        iters.write_row({static_cast<double>(st.iter), st.j_total, st.fidelity_term,
                         st.penalty_term, st.worst_member_error});

    auto members = ensemble.members();
    CsvWriter memb((rs.out_dir / "member_errors.csv").string(),
                   {"member", "delta_ryd_khz", "amp_scale", "error"});
    const auto& last = result.record.iterations.back();
    for (size_t n = 0; n < members.size(); ++n)
        memb.write_row({static_cast<double>(n),
                        members[n].delta_ryd / angular_from_khz(1.0),
                        members[n].amp_scale, last.member_errors[n]});

    GateReport rep = gate_report_for(rs.params, result.controls, target4);
    write_text(rs.out_dir / "gate_report.json", rep.to_json());
    if (get_bool(rs.config, "spectra", true)) write_spectra(result.controls, rs.out_dir);
}

}  // namespace

std::string run_scenario(const std::string& config_path, const RunOptions& opts) {
    json config = load_json(config_path);
    require_object(config, "config");
    // allow re-running straight from a manifest
    if (config.contains("tool") && config.contains("config")) {
        json inner = config.at("config");
        if (opts.seed < 0 && config.contains("seed"))
            inner["seed"] = config.at("seed");
        config = inner;
    }
    for (const auto& expr : opts.overrides) apply_override(config, expr);

    ResolvedScenario rs;
    rs.kind = get_string(config, "kind", "");
    if (rs.kind.empty()) throw ConfigError("config.kind is required");
    if (opts.seed >= 0) config["seed"] = opts.seed;
    if (!opts.output_dir.empty()) config["output_dir"] = opts.output_dir;
    if (opts.jobs >= 0) config["jobs"] = opts.jobs;
    rs.seed = static_cast<std::uint64_t>(get_integer(config, "seed", 0));
    rs.jobs = static_cast<int>(get_integer(config, "jobs", 0));
    rs.params = parse_params(config);
    if (config.contains("grid")) {
        check_keys(config.at("grid"), "grid", {"n_steps"});
        rs.n_steps = static_cast<int>(get_integer(config.at("grid"), "n_steps", 2000));
        if (rs.n_steps < 2) throw ConfigError("grid.n_steps must be >= 2");
    }
    rs.out_dir = get_string(config, "output_dir", "out");
    config["seed"] = rs.seed;
    config["jobs"] = rs.jobs;
    config["output_dir"] = rs.out_dir.string();
    rs.config = config;

    static const std::set<std::string> common = {"kind", "seed", "jobs", "output_dir",
                                                 "params", "grid", "target"};
    std::set<std::string> allowed = common;
    if (rs.kind == "simulate") {
        allowed.insert({"schedule", "pulse_dump", "propagation", "observables",
                        "spectra", "initial_states"});
    } else if (rs.kind == "speed_limit_scan") {
        allowed.insert({"scan"});
    } else if (rs.kind == "stirap_amplitude_scan") {
        allowed.insert({"schedule", "scan"});
    } else if (rs.kind == "robustness_sweep") {
        allowed.insert({"schedule", "pulse_dump", "noise", "robustness"});
    } else if (rs.kind == "optimize") {
        allowed.insert({"schedule", "pulse_dump", "ensemble", "krotov", "spectra"});
    } else {
        throw ConfigError("unknown kind: " + rs.kind);
    }
    check_keys(rs.config, "config", allowed);

    std::error_code ec;
    fs::create_directories(rs.out_dir, ec);
    if (ec) throw IoError("cannot create output dir: " + rs.out_dir.string());

    if (rs.kind == "simulate")
        run_simulate(rs);
    else if (rs.kind == "speed_limit_scan")
        run_speed_limit_scan(rs);
    else if (rs.kind == "stirap_amplitude_scan")
        run_stirap_amplitude_scan(rs);
    else if (rs.kind == "robustness_sweep")
        run_robustness_sweep(rs);
    else if (rs.kind == "optimize")
        run_optimize(rs);
    write_manifest(rs);
    return rs.out_dir.string();
}

}  // namespace ryd

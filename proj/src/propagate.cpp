#include "rydsim/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rydsim/csv.hpp"

namespace ryd {

namespace detail {

StepEig eigendecompose(const Mat16& h) {
    Eigen::SelfAdjointEigenSolver<Mat16> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("Hamiltonian eigendecomposition failed");
    return StepEig{solver.eigenvectors(), solver.eigenvalues().array()};
}


Mat16 step_hamiltonian(const SystemParams& params, const ControlSet& controls, int k,
                       int magnus_order) {
    Mat16 h = build_h2q(params, controls.sample(k));
    if (magnus_order == 2) return h;
    if (magnus_order != 4)
        throw std::invalid_argument("magnus_order must be 2 or 4");
    int n = controls.n_steps();
    if (n < 3) return h;
    double dt = controls.grid().dt();
    // Clamp the stencil at the ends; the envelopes vanish smoothly there.
    int kc = std::clamp(k, 1, n - 2);
    Mat16 h_prev = build_h2q(params, controls.sample(kc - 1));
    Mat16 h_mid = kc == k ? h : build_h2q(params, controls.sample(kc));
    Mat16 h_next = build_h2q(params, controls.sample(kc + 1));
    Mat16 hdot = (h_next - h_prev) / (2.0 * dt);
    Mat16 comm = h * hdot - hdot * h;
    // effective constant Hamiltonian of the step: midpoint value, quadrature
    // (curvature) term, and the leading Magnus commutator
    return h + (h_next - 2.0 * h_mid + h_prev) / 24.0 +
           complexd(0.0, dt * dt / 12.0) * comm;
}

Mat16 StepEig::unitary(double t) const {
    Eigen::Vector<complexd, 16> phases;
    for (int a = 0; a < 16; ++a) phases(a) = std::polar(1.0, -values(a) * t);
    return vectors * phases.asDiagonal() * vectors.adjoint();
}

namespace {

inline int left_of(int idx) { return idx / 4; }
inline int right_of(int idx) { return idx % 4; }

// Exact flow of one atom's decay channel: |i> population feeds |0> with
// factor (1 - f), coherences carrying a single |i> index shrink by sqrt(f).
template <bool Left>
void atom_decay(Mat16& rho, double f) {
    double h = std::sqrt(f);
    auto level = [](int idx) { return Left ? left_of(idx) : right_of(idx); };
    auto swap_to_0 = [](int idx) {
        return Left ? basis::pair_index(basis::q0, right_of(idx))
                    : basis::pair_index(left_of(idx), basis::q0);
    };
    for (int m = 0; m < 16; ++m) {
        bool mi = level(m) == basis::li;
        for (int n = 0; n < 16; ++n) {
            bool ni = level(n) == basis::li;
            if (mi && ni) {
                rho(swap_to_0(m), swap_to_0(n)) += (1.0 - f) * rho(m, n);
                rho(m, n) *= f;
            } else if (mi || ni) {
                rho(m, n) *= h;
            }
        }
    }
}

template <bool Left>
void atom_decay_adjoint(Mat16& sigma, double f) {
    double h = std::sqrt(f);
    auto level = [](int idx) { return Left ? left_of(idx) : right_of(idx); };
    auto swap_to_0 = [](int idx) {
        return Left ? basis::pair_index(basis::q0, right_of(idx))
                    : basis::pair_index(left_of(idx), basis::q0);
    };
    for (int m = 0; m < 16; ++m) {
        bool mi = level(m) == basis::li;
        for (int n = 0; n < 16; ++n) {
            bool ni = level(n) == basis::li;
            if (mi && ni) {
                sigma(m, n) = f * sigma(m, n) + (1.0 - f) * sigma(swap_to_0(m), swap_to_0(n));
            } else if (mi || ni) {
                sigma(m, n) *= h;
            }
        }
    }
}

}  // namespace

void dissipator_flow(Mat16& rho, double gamma, double t) {
    if (gamma == 0.0 || t == 0.0) return;
    double f = std::exp(-gamma * t);
    atom_decay<true>(rho, f);
    atom_decay<false>(rho, f);
}

void dissipator_flow_adjoint(Mat16& sigma, double gamma, double t) {
    if (gamma == 0.0 || t == 0.0) return;
    double f = std::exp(-gamma * t);
    atom_decay_adjoint<true>(sigma, f);
    atom_decay_adjoint<false>(sigma, f);
}

const CompositionCoeffs& composition(int order) {
    static const CompositionCoeffs strang = {{1.0}, {0.5, 0.5}};
    auto from_widths = [](std::vector<double> u) {
        CompositionCoeffs cc;
        cc.u = u;
        cc.d.resize(u.size() + 1);
        cc.d.front() = 0.5 * u.front();
        for (size_t j = 1; j < u.size(); ++j) cc.d[j] = 0.5 * (u[j - 1] + u[j]);
        cc.d.back() = 0.5 * u.back();
        return cc;
    };
    static const CompositionCoeffs yoshida4 = [&] {
        double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        double w0 = 1.0 - 2.0 * w1;
        return from_widths({w1, w0, w1});
    }();
    static const CompositionCoeffs yoshida6 = [&] {
        // Yoshida's 6th-order solution A.
        double w1 = -1.17767998417887;
        double w2 = 0.235573213359357;
        double w3 = 0.784513610477560;
        double w0 = 1.0 - 2.0 * (w1 + w2 + w3);
        return from_widths({w3, w2, w1, w0, w1, w2, w3});
    }();
    switch (order) {
        case 2: return strang;
        case 4: return yoshida4;
        case 6: return yoshida6;
    }
    throw std::invalid_argument("composition order must be 2, 4 or 6");
}

void lindblad_step(Mat16& rho, const StepEig& eig, double gamma, double dt,
                   const CompositionCoeffs& cc) {
    for (size_t s = 0; s < cc.u.size(); ++s) {
        dissipator_flow(rho, gamma, cc.d[s] * dt);
        Mat16 u = eig.unitary(cc.u[s] * dt);
        rho = u * rho * u.adjoint();
    }
    dissipator_flow(rho, gamma, cc.d.back() * dt);
}

void lindblad_step_adjoint(Mat16& sigma, const StepEig& eig, double gamma, double dt,
                           const CompositionCoeffs& cc) {
    dissipator_flow_adjoint(sigma, gamma, cc.d.back() * dt);
    for (size_t s = cc.u.size(); s-- > 0;) {
        Mat16 u = eig.unitary(cc.u[s] * dt);
        sigma = u.adjoint() * sigma * u;
        dissipator_flow_adjoint(sigma, gamma, cc.d[s] * dt);
    }
}

}  // namespace detail

const std::vector<double>* Trajectory::column(const std::string& name) const {
    for (const auto& [n, v] : columns)
        if (n == name) return &v;
    return nullptr;
}

double Trajectory::column_max(const std::string& name) const {
    const auto* col = column(name);
    if (!col || col->empty())
        throw std::invalid_argument("trajectory is missing observable: " + name);
    double m = (*col)[0];
    for (double v : *col) m = std::max(m, v);
    return m;
}

double Trajectory::column_final(const std::string& name) const {
    const auto* col = column(name);
    if (!col || col->empty())
        throw std::invalid_argument("trajectory is missing observable: " + name);
    return col->back();
}

void Trajectory::save_csv(const std::string& path) const {
    std::vector<std::string> header = {"t_ns"};
    for (const auto& [name, values] : columns) header.push_back(name);
    CsvWriter csv(path, header);
    for (size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row = {times[i]};
        for (const auto& [name, values] : columns) row.push_back(values[i]);
        csv.write_row(row);
    }
}

namespace {

constexpr std::array<const char*, 5> intermediate_labels = {"0i", "i0", "ii", "ir", "ri"};

class TrajectoryRecorder {
  public:
    TrajectoryRecorder(const TrajectorySpec& spec, const TimeGrid& grid)
        : spec_(spec), grid_(grid) {
        if (spec.stride < 1) throw std::invalid_argument("trajectory stride must be >= 1");
        for (const auto& s : spec.states) {
            state_idx_.push_back(basis::pair_from_label(s));
            traj_.columns.emplace_back("P_" + s, std::vector<double>{});
        }
        if (spec.intermediate) {
            for (const char* lbl : intermediate_labels)
                int_idx_.push_back(basis::pair_from_label(lbl));
            traj_.columns.emplace_back("P_int", std::vector<double>{});
        }
        for (const auto& s : spec.phase_states) {
            phase_idx_.push_back(basis::pair_from_label(s));
            traj_.columns.emplace_back("phase_" + s, std::vector<double>{});
        }
    }

    bool wants(int step_boundary, int n_steps) const {
        return step_boundary % spec_.stride == 0 || step_boundary == n_steps;
    }

    void record_state(int boundary, const Vec16& psi) {
        std::vector<double> pop(16);
        for (int a = 0; a < 16; ++a) pop[a] = std::norm(psi(a));
        record_common(boundary, pop);
        size_t col = state_idx_.size() + (spec_.intermediate ? 1 : 0);
        for (size_t p = 0; p < phase_idx_.size(); ++p) {
            complexd amp = psi(phase_idx_[p]);
            // phase of an empty component reported as 0
            double ph = std::abs(amp) < 1e-300 ? 0.0 : std::arg(amp);
            traj_.columns[col + p].second.push_back(ph);
        }
    }

    void record_density(int boundary, const Mat16& rho) {
        std::vector<double> pop(16);
        for (int a = 0; a < 16; ++a) pop[a] = rho(a, a).real();
        record_common(boundary, pop);
        size_t col = state_idx_.size() + (spec_.intermediate ? 1 : 0);
        for (size_t p = 0; p < phase_idx_.size(); ++p)
            traj_.columns[col + p].second.push_back(0.0);
    }

    Trajectory take() { return std::move(traj_); }

  private:
    void record_common(int boundary, const std::vector<double>& pop) {
        traj_.times.push_back(grid_.boundary(boundary));
        for (size_t s = 0; s < state_idx_.size(); ++s)
            traj_.columns[s].second.push_back(pop[state_idx_[s]]);
        if (spec_.intermediate) {
            double total = 0.0;
            for (int idx : int_idx_) total += pop[idx];
            traj_.columns[state_idx_.size()].second.push_back(total);
        }
    }

    TrajectorySpec spec_;
    TimeGrid grid_;
    std::vector<int> state_idx_;
    std::vector<int> int_idx_;
    std::vector<int> phase_idx_;
    Trajectory traj_;
};

}  // namespace

std::pair<Vec16, Trajectory> propagate_state(const SystemParams& params,
                                             const ControlSet& controls,
                                             const Vec16& initial,
                                             const TrajectorySpec& spec,
                                             const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    const TimeGrid& grid = controls.grid();
    double dt = grid.dt();
    TrajectoryRecorder rec(spec, grid);
    Vec16 psi = initial;
    if (rec.wants(0, grid.n_steps)) rec.record_state(0, psi);
    for (int k = 0; k < grid.n_steps; ++k) {
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        psi = eig.unitary(dt) * psi;
        if (rec.wants(k + 1, grid.n_steps)) rec.record_state(k + 1, psi);
    }
    return {psi, rec.take()};
}

Mat16 propagate_propagator(const SystemParams& params, const ControlSet& controls,
                           const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    double dt = controls.grid().dt();
    Mat16 u = Mat16::Identity();
    for (int k = 0; k < controls.n_steps(); ++k) {
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        u = eig.unitary(dt) * u;
    }
    return u;
}

Eigen::Matrix4cd logical_evolution_map(const SystemParams& params,
                                       const ControlSet& controls,
                                       const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    double dt = controls.grid().dt();
    Eigen::Matrix<complexd, 16, 4> block = Eigen::Matrix<complexd, 16, 4>::Zero();
    for (int b = 0; b < 4; ++b) block(basis::logical[b], b) = 1.0;
    for (int k = 0; k < controls.n_steps(); ++k) {
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        block = eig.unitary(dt) * block;
    }
    Eigen::Matrix4cd u;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) u(a, b) = block(basis::logical[a], b);
    return u;
}

LogicalRun propagate_logical(const SystemParams& params, const ControlSet& controls,
                             const TrajectorySpec& spec,
                             const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    const TimeGrid& grid = controls.grid();
    double dt = grid.dt();
    Eigen::Matrix<complexd, 16, 4> block = Eigen::Matrix<complexd, 16, 4>::Zero();
    for (int b = 0; b < 4; ++b) block(basis::logical[b], b) = 1.0;
    std::vector<TrajectoryRecorder> recs;
    for (int b = 0; b < 4; ++b) recs.emplace_back(spec, grid);
    auto record = [&](int boundary) {
        if (!recs[0].wants(boundary, grid.n_steps)) return;
        for (int b = 0; b < 4; ++b) recs[b].record_state(boundary, block.col(b));
    };
    record(0);
    for (int k = 0; k < grid.n_steps; ++k) {
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        block = eig.unitary(dt) * block;
        record(k + 1);
    }
    LogicalRun run;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) run.map(a, b) = block(basis::logical[a], b);
    for (int b = 0; b < 4; ++b) run.trajectories[b] = recs[b].take();
    return run;
}

std::pair<Mat16, Trajectory> propagate_lindblad(const SystemParams& params,
                                                const ControlSet& controls,
                                                const Mat16& initial,
                                                const TrajectorySpec& spec,
                                                const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    if ((initial - initial.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("propagate_lindblad: initial state not Hermitian");
    double tr0 = initial.trace().real();
    if (tr0 > 1.0 + 1e-9)
        throw std::invalid_argument("propagate_lindblad: initial trace exceeds 1");
    const auto& cc = detail::composition(opts.composition_order);
    const TimeGrid& grid = controls.grid();
    double dt = grid.dt();
    double gamma = 1.0 / params.tau_i;
    TrajectoryRecorder rec(spec, grid);
    Mat16 rho = initial;
    if (rec.wants(0, grid.n_steps)) rec.record_density(0, rho);
    for (int k = 0; k < grid.n_steps; ++k) {
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        detail::lindblad_step(rho, eig, gamma, dt, cc);
        if (rec.wants(k + 1, grid.n_steps)) rec.record_density(k + 1, rho);
    }
    if (std::abs(rho.trace().real() - tr0) > 1e-8)
        throw std::runtime_error("propagate_lindblad: trace drift beyond tolerance");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("propagate_lindblad: hermiticity loss beyond tolerance");
    return {rho, rec.take()};
}

std::vector<Mat16> propagate_costate(const SystemParams& params,
                                     const ControlSet& controls, const Mat16& terminal,
                                     const PropagationOptions& opts) {
    params.validate();
    controls.check_finite();
    const auto& cc = detail::composition(opts.composition_order);
    double dt = controls.grid().dt();
    double gamma = 1.0 / params.tau_i;
    int n = controls.n_steps();
    std::vector<Mat16> sigma(n + 1);
    sigma[n] = terminal;
    for (int k = n - 1; k >= 0; --k) {
        Mat16 s = sigma[k + 1];
        auto eig = detail::eigendecompose(
            detail::step_hamiltonian(params, controls, k, opts.magnus_order));
        detail::lindblad_step_adjoint(s, eig, gamma, dt, cc);
        sigma[k] = s;
    }
    return sigma;
}

}  // namespace ryd

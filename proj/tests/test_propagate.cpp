#include <doctest.h>

#include <cmath>

#include "rydsim/metrics.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/pulses.hpp"
#include "rydsim/units.hpp"
#include "test_util.hpp"

using namespace ryd;

namespace {

Vec16 basis_state(const std::string& label) {
    Vec16 v = Vec16::Zero();
    v(basis::pair_from_label(label)) = 1.0;
    return v;
}

Mat16 basis_density(const std::string& label) {
    int idx = basis::pair_from_label(label);
    Mat16 m = Mat16::Zero();
    m(idx, idx) = 1.0;
    return m;
}

ControlSet left_blue_blackman(double total, double peak, int n_steps) {
    PulseSchedule s;
    s.scheme = Scheme::Custom;
    s.total_time = total;
    s.pulses.push_back({PulseShape::Blackman, Channel::BlueLeft, 0.0, total, peak, 0, 0});
    return render(s, n_steps);
}

double trace_norm(const Mat16& m) {
    Eigen::SelfAdjointEigenSolver<Mat16> es(m);
    return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

TEST_CASE("free evolution: populations constant, qubit phase e^{-i E1 T}") {
    SystemParams p;
    TimeGrid grid(0.0, 10.0, 100);
    ControlSet controls(grid);
    auto [state, traj] = propagate_state(p, controls, basis_state("01"));
    CHECK(std::abs(std::abs(state(1)) - 1.0) < 1e-12);
    complexd expected = std::polar(1.0, -p.e1 * 10.0);
    CHECK(std::abs(state(1) - expected) < 1e-9);
}

TEST_CASE("resonant two-level rabi oracle: population = sin^2(area/2)") {
    SystemParams p;
    p.delta1 = 0.0;  // resonant one-photon transition
    double total = 40.0;
    double peak = 0.31;  // rad/ns
    ControlSet controls = left_blue_blackman(total, peak, 1500);
    // oracle: area from the same midpoint quadrature the controls define
    double area = 0.0;
    for (int k = 0; k < controls.n_steps(); ++k)
        area += controls.channel(Channel::BlueLeft)(k).real() * controls.grid().dt();
    double expected = std::sin(0.5 * area) * std::sin(0.5 * area);

    auto [state, traj] = propagate_state(p, controls, basis_state("00"));
    double p_i0 = std::norm(state(basis::pair_from_label("i0")));
    CHECK(p_i0 == doctest::Approx(expected).epsilon(1e-6));

    // independent closed-form area for the blackman envelope: 0.42 E0 T
    CHECK(area == doctest::Approx(0.42 * peak * total).epsilon(1e-6));
}

TEST_CASE("unitary propagator is unitary; non-finite controls rejected") {
    SystemParams p;
    ControlSet controls = render(make_simultaneous(20.0, 40.0, 0.8, 0.5), 300);
    Mat16 u = propagate_propagator(p, controls);
    CHECK((u.adjoint() * u - Mat16::Identity()).cwiseAbs().maxCoeff() < 1e-10);

    ControlSet bad = controls;
    bad.channel(Channel::RedLeft)(5) = complexd(std::nan(""), 0.0);
    CHECK_THROWS_AS(propagate_state(p, bad, basis_state("00")), std::invalid_argument);
}

TEST_CASE("logical map of free evolution carries only qubit phases") {
    SystemParams p;
    TimeGrid grid(0.0, 7.0, 70);
    ControlSet controls(grid);
    Eigen::Matrix4cd u = logical_evolution_map(p, controls);
    Eigen::Matrix4cd expected = Eigen::Matrix4cd::Zero();
    expected(0, 0) = 1.0;
    expected(1, 1) = std::polar(1.0, -p.e1 * 7.0);
    expected(2, 2) = std::polar(1.0, -p.e1 * 7.0);
    expected(3, 3) = std::polar(1.0, -2.0 * p.e1 * 7.0);
    CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("lindblad decay oracle: exponential decay of the intermediate level") {
    SystemParams p;  // zero controls: H diagonal, splitting exact
    TimeGrid grid(0.0, 300.0, 600);
    ControlSet controls(grid);
    TrajectorySpec spec;
    spec.states = {"i0", "00"};
    auto [rho, traj] = propagate_lindblad(p, controls, basis_density("i0"), spec);
    const auto& t = traj.times;
    const auto& pi0 = *traj.column("P_i0");
    const auto& p00 = *traj.column("P_00");
    for (size_t s = 0; s < t.size(); ++s) {
        double expected = std::exp(-t[s] / p.tau_i);
        CHECK(std::abs(pi0[s] - expected) < 1e-6);
        CHECK(std::abs(p00[s] - (1.0 - expected)) < 1e-6);
    }
}

TEST_CASE("double decay: |ii> loses population at twice the rate") {
    SystemParams p;
    TimeGrid grid(0.0, 150.0, 300);
    ControlSet controls(grid);
    TrajectorySpec spec;
    spec.states = {"ii"};
    auto [rho, traj] = propagate_lindblad(p, controls, basis_density("ii"), spec);
    double expected = std::exp(-2.0 * 150.0 / p.tau_i);
    CHECK(std::abs(traj.column_final("P_ii") - expected) < 1e-6);
}

TEST_CASE("lindblad with no decay matches unitary propagation") {
    SystemParams p;
    p.tau_i = std::numeric_limits<double>::infinity();
    ControlSet controls = render(make_simultaneous(15.0, 30.0, 0.9, 0.6), 240);
    Vec16 psi0 = basis_state("00");
    auto [psi, traj_u] = propagate_state(p, controls, psi0);
    Mat16 rho0 = psi0 * psi0.adjoint();
    auto [rho, traj_l] = propagate_lindblad(p, controls, rho0);
    Mat16 expected = psi * psi.adjoint();
    CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("lindblad preserves trace and hermiticity on a driven mixed state") {
    SystemParams p;
    ControlSet controls = render(make_simultaneous(15.0, 30.0, 0.9, 0.6), 300);
    Mat16 rho0 = Mat16::Zero();
    for (int idx : basis::logical) rho0(idx, idx) = 0.25;
    auto [rho, traj] = propagate_lindblad(p, controls, rho0);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
    CHECK(std::abs(rho.trace().imag()) < 1e-12);
    CHECK(test::herm_defect(rho) < 1e-12);
}

TEST_CASE("lindblad evolution is contractive in trace norm") {
    SystemParams p;
    p.tau_i = 40.0;
    ControlSet controls = render(make_simultaneous(15.0, 30.0, 0.9, 0.6), 200);
    for (unsigned seed : {3u, 17u}) {
        Mat16 r1 = test::random_density(seed);
        Mat16 r2 = test::random_density(seed + 100);
        double before = trace_norm(r1 - r2);
        Mat16 f1 = propagate_lindblad(p, controls, r1).first;
        Mat16 f2 = propagate_lindblad(p, controls, r2).first;
        double after = trace_norm(f1 - f2);
        CHECK(after <= before + 1e-10);
    }
}

TEST_CASE("step halving leaves the final state unchanged") {
    SystemParams p;
    auto schedule = make_simultaneous(50.0, 400.0, 1.8, 0.9);
    ControlSet controls = render(schedule, 2000);
    ControlSet halved = controls.subdivided(2);
    Eigen::Matrix4cd target = cphase_target(std::numbers::pi, p.e1 * schedule.total_time);

    SUBCASE("unitary stepping is exact per step") {
        double f1 = gate_fidelity(logical_evolution_map(p, controls), target);
        double f2 = gate_fidelity(logical_evolution_map(p, halved), target);
        CHECK(std::abs(f1 - f2) < 1e-11);
    }
    SUBCASE("lindblad splitting error stays below 1e-8") {
        Mat16 rho0 = basis_density("00");
        Mat16 r1 = propagate_lindblad(p, controls, rho0).first;
        Mat16 r2 = propagate_lindblad(p, halved, rho0).first;
        CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("magnus-corrected stepping converges at fourth order") {
        PropagationOptions opts;
        opts.magnus_order = 4;
        double f4 = gate_fidelity(logical_evolution_map(p, render(schedule, 4000), opts),
                                  target);
        double f8 = gate_fidelity(logical_evolution_map(p, render(schedule, 8000), opts),
                                  target);
        double f16 = gate_fidelity(
            logical_evolution_map(p, render(schedule, 16000), opts), target);
        double r = std::abs(f8 - f4) / std::abs(f16 - f8);
        CHECK(r > 8.0);  // ~16 for a fourth-order scheme
    }
}

TEST_CASE("costate propagation") {
    SystemParams p;
    ControlSet controls = render(make_simultaneous(15.0, 30.0, 0.9, 0.6), 150);

    SUBCASE("terminal condition O rho O^dag for the identity target") {
        Mat16 rho0 = basis_density("01");
        Mat16 o = Mat16::Identity();
        Mat16 terminal = o * rho0 * o.adjoint();
        CHECK((terminal - rho0).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("no decay: backward is the exact inverse of forward") {
        SystemParams q = p;
        q.tau_i = std::numeric_limits<double>::infinity();
        Mat16 terminal = test::random_density(5);
        auto sigma = propagate_costate(q, controls, terminal);
        // forward-propagate sigma(0) and compare with the terminal state
        Mat16 fwd = propagate_lindblad(q, controls, sigma.front()).first;
        CHECK((fwd - terminal).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("adjoint pairing <sigma(t), rho(t)> is conserved stepwise") {
        Mat16 rho0 = test::random_density(9);
        Mat16 terminal = test::random_hermitian(21);
        auto sigma = propagate_costate(p, controls, terminal);
        TrajectorySpec none;
        Mat16 rho = rho0;
        complexd pairing0 = (sigma.front().adjoint() * rho0).trace();
        // step rho forward manually and compare the pairing at each boundary
        PropagationOptions opts;
        const auto& cc = detail::composition(opts.composition_order);
        double gamma = 1.0 / p.tau_i;
        for (int k = 0; k < controls.n_steps(); ++k) {
            auto eig = detail::eigendecompose(build_h2q(p, controls.sample(k)));
            detail::lindblad_step(rho, eig, gamma, controls.grid().dt(), cc);
            complexd pairing = (sigma[k + 1].adjoint() * rho).trace();
            CHECK(std::abs(pairing - pairing0) < 1e-10);
        }
    }
}

TEST_CASE("trajectory stride and intermediate aggregate") {
    SystemParams p;
    ControlSet controls = left_blue_blackman(20.0, 0.5, 200);
    TrajectorySpec spec;
    spec.stride = 50;
    spec.states = {"00"};
    spec.intermediate = true;
    spec.phase_states = {"00"};
    auto [state, traj] = propagate_state(p, controls, basis_state("00"));
    auto [state2, traj2] = propagate_state(p, controls, basis_state("00"), spec);
    CHECK(traj2.times.size() == 5);  // 0, 50, 100, 150, 200
    const auto* p00 = traj2.column("P_00");
    const auto* pint = traj2.column("P_int");
    REQUIRE(p00 != nullptr);
    REQUIRE(pint != nullptr);
    for (size_t s = 0; s < traj2.times.size(); ++s)
        CHECK((*p00)[s] + (*pint)[s] == doctest::Approx(1.0).epsilon(1e-9));
}

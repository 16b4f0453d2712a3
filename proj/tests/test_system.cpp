#include <doctest.h>

#include "rydsim/pulses.hpp"
#include "rydsim/system.hpp"
#include "rydsim/units.hpp"
#include "test_util.hpp"

using namespace ryd;

TEST_CASE("table-one defaults and diagonal of the single-atom hamiltonian") {
    SystemParams p;
    Mat4 h = build_h1q(p, 0.0, 0.0);
    CHECK(h(0, 0) == complexd(0.0, 0.0));
    CHECK(h(1, 1).real() == doctest::Approx(angular_from_ghz(9.100)).epsilon(1e-15));
    CHECK(h(2, 2).real() == doctest::Approx(angular_from_ghz(1.273)).epsilon(1e-15));
    CHECK(h(3, 3) == complexd(0.0, 0.0));
    CHECK((h - Mat4(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-atom hamiltonian is hermitian for complex controls") {
    SystemParams p;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        complexd wb(u(rng), u(rng)), wr(u(rng), u(rng));
        Mat4 h = build_h1q(p, wb, wr);
        CHECK((h - Mat4(h.adjoint())).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(h(0, 2) == 0.5 * wb);
        CHECK(h(2, 3) == 0.5 * wr);
    }
}

TEST_CASE("two-photon detuning shift moves the rydberg diagonal entry only") {
    SystemParams p;
    Mat4 h0 = build_h1q(p, 0.0, 0.0);
    SystemParams shifted = p;
    shifted.delta2 += angular_from_khz(300.0);
    Mat4 h1 = build_h1q(shifted, 0.0, 0.0);
    CHECK((h1 - h0).cwiseAbs().maxCoeff() ==
          doctest::Approx(angular_from_khz(300.0)).epsilon(1e-15));
    CHECK(std::abs(h1(3, 3) - h0(3, 3) - angular_from_khz(300.0)) < 1e-15);
}

TEST_CASE("two-atom hamiltonian: diagonal with zero controls, rr entry") {
    SystemParams p;
    Mat16 h = build_h2q(p, ControlSample{});
    CHECK((h - Mat16(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    int rr = basis::pair_from_label("rr");
    CHECK(h(rr, rr).real() ==
          doctest::Approx(2.0 * p.delta2 - angular_from_mhz(57.26)).epsilon(1e-15));

    SystemParams q = p;
    q.delta2 = angular_from_mhz(1.5);
    Mat16 h2 = build_h2q(q, ControlSample{});
    CHECK(h2(rr, rr).real() ==
          doctest::Approx(2.0 * q.delta2 - q.u).epsilon(1e-15));
}

TEST_CASE("two-atom hamiltonian: hermitian, swap-symmetric for identical controls") {
    SystemParams p;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Mat16 swap = basis::swap_operator();
    for (int trial = 0; trial < 20; ++trial) {
        complexd wb(u(rng), u(rng)), wr(u(rng), u(rng));
        ControlSample s{wb, wr, wb, wr};
        Mat16 h = build_h2q(p, s);
        CHECK(test::herm_defect(h) < 1e-12);
        CHECK((h * swap - swap * h).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dissipator ops: rates, action, trace annihilation") {
    SystemParams p;
    auto jumps = build_dissipator_ops(p);
    REQUIRE(jumps.size() == 2);
    CHECK(jumps[0].rate == doctest::Approx(1.0 / 150.0).epsilon(1e-15));
    CHECK(jumps[1].rate == doctest::Approx(1.0 / 150.0).epsilon(1e-15));

    // A1 |i0><i0| A1^dag = |00><00|
    int i0 = basis::pair_from_label("i0");
    Mat16 rho = Mat16::Zero();
    rho(i0, i0) = 1.0;
    Mat16 moved = jumps[0].op * rho * jumps[0].op.adjoint();
    CHECK(moved(0, 0) == complexd(1.0, 0.0));
    CHECK(moved.cwiseAbs().sum() == doctest::Approx(1.0));

    for (unsigned seed : {1u, 2u, 3u}) {
        Mat16 r = test::random_hermitian(seed);
        Mat16 ld = apply_dissipator(p, r);
        CHECK(std::abs(ld.trace()) < 1e-12);
        CHECK(test::herm_defect(ld) < 1e-12);
    }

    SystemParams bad;
    bad.tau_i = 0.0;
    CHECK_THROWS_AS(build_dissipator_ops(bad), std::invalid_argument);
}

TEST_CASE("perturbations: identity, amplitude scale, rydberg shift, time shift") {
    SystemParams p;
    ControlSet controls = render(make_simultaneous(50.0, 100.0, 1.0, 0.5), 400);

    SUBCASE("identity returns inputs unchanged") {
        auto [p2, c2] = apply_perturbation(p, controls, Perturbation{});
        CHECK(p2.delta2 == p.delta2);
        for (Channel ch : all_channels)
            CHECK((c2.channel(ch) - controls.channel(ch)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("amp_scale multiplies every sample exactly") {
        auto [p2, c2] = apply_perturbation(p, controls, Perturbation{0.0, 1.05, 0.0});
        for (Channel ch : all_channels)
            for (int k = 0; k < controls.n_steps(); ++k)
                CHECK(c2.channel(ch)(k) == 1.05 * controls.channel(ch)(k));
    }
    SUBCASE("delta_ryd lands in delta2") {
        Perturbation pert{angular_from_khz(300.0), 1.0, 0.0};
        auto [p2, c2] = apply_perturbation(p, controls, pert);
        CHECK(p2.delta2 == doctest::Approx(angular_from_mhz(0.3)).epsilon(1e-12));
    }
    SUBCASE("time shift moves only right-atom channels, zero outside grid") {
        auto [p2, c2] = apply_perturbation(p, controls, Perturbation{0.0, 1.0, 30.0});
        CHECK((c2.channel(Channel::BlueLeft) - controls.channel(Channel::BlueLeft))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        // the right-atom envelope moved later by 30 ns
        const auto& src = controls.channel(Channel::BlueRight);
        const auto& dst = c2.channel(Channel::BlueRight);
        int k_probe = 250;  // inside the central window
        double t = controls.grid().midpoint(k_probe);
        (void)t;
        int shift_steps = static_cast<int>(30.0 / controls.grid().dt());
        CHECK(std::abs(dst(k_probe) - src(k_probe - shift_steps)) < 2e-2);
        CHECK_THROWS_AS(
            apply_perturbation(p, controls, Perturbation{0.0, 1.0, 1e6}),
            std::invalid_argument);
    }
    SUBCASE("non-positive amplitude scale rejected") {
        CHECK_THROWS_AS(apply_perturbation(p, controls, Perturbation{0.0, 0.0, 0.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("basis bookkeeping") {
    CHECK(basis::pair_from_label("00") == 0);
    CHECK(basis::pair_from_label("01") == 1);
    CHECK(basis::pair_from_label("10") == 4);
    CHECK(basis::pair_from_label("rr") == 15);
    CHECK(basis::pair_label(6) == "1i");
    Mat16 proj = basis::logical_projector();
    CHECK(proj.trace() == complexd(4.0, 0.0));
    CHECK((proj * proj - proj).cwiseAbs().maxCoeff() == 0.0);
}

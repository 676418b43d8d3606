#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "waveris/beamform.hpp"
#include "waveris/optimize.hpp"
#include "waveris/rng.hpp"

using namespace waveris;

namespace {

ArrayScenario far_field(std::size_t m, std::vector<double> desired = {},
                        std::vector<double> undesired = {}) {
    ArrayScenario s;
    s.element_count = m;
    s.spacing_wavelengths = 0.2;
    s.desired_dirs = std::move(desired);
    s.undesired_dirs = std::move(undesired);
    return s;
}

ReflectionState random_unit_state(std::size_t m, Rng& rng) {
    ReflectionState st;
    st.phi.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double a = kTwoPi * rng.uniform01();
        st.phi.push_back(Complex(std::cos(a), std::sin(a)));
    }
    return st;
}

} // namespace

TEST_CASE("broadside steering channel is all ones", "[beamform]") {
    const auto h = steering_channel(far_field(16), 0.0);
    for (const Complex& z : h) {
        CHECK_THAT(std::abs(z - Complex(1.0, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("steering phase at 30 degrees matches the direct substitution", "[beamform]") {
    const auto h = steering_channel(far_field(4), deg_to_rad(30.0));
    CHECK_THAT(std::arg(h[1]), Catch::Matchers::WithinAbs(-0.2 * kPi, 1e-12));
}

TEST_CASE("mirror directions conjugate the channel", "[beamform]") {
    const auto scn = far_field(32);
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const double th = (rng.uniform01() - 0.5) * kPi * 0.99;
        const auto a = steering_channel(scn, th);
        const auto b = steering_channel(scn, -th);
        for (std::size_t m = 0; m < a.size(); ++m) {
            REQUIRE_THAT(std::abs(a[m] - std::conj(b[m])),
                         Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("uniform state yields the coherent broadside sum", "[beamform]") {
    const auto scn = far_field(100);
    ReflectionState st{std::vector<Complex>(100, Complex(1.0, 0.0))};
    CHECK_THAT(directed_power(scn, st, 0.0), Catch::Matchers::WithinRel(1e4, 1e-12));
}

TEST_CASE("matched phases achieve rho M^2 at the target", "[beamform]") {
    const auto scn = far_field(100);
    const auto st = ideal_phases(scn, deg_to_rad(-30.0));
    CHECK_THAT(directed_power(scn, st, deg_to_rad(-30.0)),
               Catch::Matchers::WithinRel(1e4, 1e-9));
}

TEST_CASE("random unit states average to rho M at broadside", "[beamform]") {
    const auto scn = far_field(100);
    Rng rng(17);
    double acc = 0.0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        acc += directed_power(scn, random_unit_state(100, rng), 0.0);
    }
    CHECK_THAT(acc / trials, Catch::Matchers::WithinRel(100.0, 0.05));
}

TEST_CASE("pattern power never exceeds the coherent bound", "[beamform]") {
    const auto scn = far_field(64);
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        ReflectionState st = random_unit_state(64, rng);
        for (auto& z : st.phi) {
            z *= rng.uniform01(); // arbitrary sub-unit magnitudes
        }
        const double th = (rng.uniform01() - 0.5) * kPi * 0.99;
        REQUIRE(directed_power(scn, st, th) <= 64.0 * 64.0 + 1e-9);
    }
}

TEST_CASE("element-symmetric states give mirror-symmetric patterns", "[beamform]") {
    const auto scn = far_field(50);
    Rng rng(29);
    ReflectionState st = random_unit_state(50, rng);
    for (std::size_t m = 0; m < 25; ++m) {
        st.phi[50 - 1 - m] = st.phi[m];
    }
    for (int i = 0; i <= 60; ++i) {
        const double th = deg_to_rad(-88.0 + i * 3.0);
        const double a = to_db(directed_power(scn, st, th));
        const double b = to_db(directed_power(scn, st, -th));
        REQUIRE_THAT(a, Catch::Matchers::WithinAbs(b, 1e-9));
    }
}

TEST_CASE("ideal pattern follows the closed-form array factor", "[beamform]") {
    const std::size_t m_count = 100;
    const auto scn = far_field(m_count);
    const double target = deg_to_rad(-30.0);
    const auto st = ideal_phases(scn, target);
    for (int i = 0; i < 50; ++i) {
        const double th = deg_to_rad(-85.0 + i * 3.4);
        const double u = scn.kappa(target) - scn.kappa(th);
        const double s = std::sin(0.5 * u);
        if (std::abs(s) < 1e-6) {
            continue;
        }
        const double expected =
            std::pow(std::sin(0.5 * static_cast<double>(m_count) * u) / s, 2.0);
        REQUIRE_THAT(directed_power(scn, st, th),
                     Catch::Matchers::WithinRel(expected, 1e-9) ||
                         Catch::Matchers::WithinAbs(expected, 1e-9));
    }
}

TEST_CASE("snr divides the directed power by the noise", "[beamform]") {
    auto scn = far_field(100, {deg_to_rad(-30.0)});
    scn.noise_power = 4.0;
    const auto st = ideal_phases(scn, deg_to_rad(-30.0));
    CHECK_THAT(snr(scn, st, deg_to_rad(-30.0)), Catch::Matchers::WithinRel(2500.0, 1e-9));
}

TEST_CASE("slnr reduces to snr with a single beam and no leakage", "[beamform]") {
    auto scn = far_field(64, {deg_to_rad(-20.0)});
    scn.noise_power = 2.5;
    Rng rng(31);
    const auto st = random_unit_state(64, rng);
    CHECK_THAT(slnr(scn, st),
               Catch::Matchers::WithinRel(snr(scn, st, deg_to_rad(-20.0)), 1e-12));
}

TEST_CASE("slnr is the worst beam over the strongest leak plus noise", "[beamform]") {
    auto scn = far_field(64, {deg_to_rad(-30.0), deg_to_rad(-15.0)},
                         {deg_to_rad(10.0), deg_to_rad(25.0)});
    Rng rng(37);
    const auto st = random_unit_state(64, rng);
    const double p1 = directed_power(scn, st, scn.desired_dirs[0]);
    const double p2 = directed_power(scn, st, scn.desired_dirs[1]);
    const double q1 = directed_power(scn, st, scn.undesired_dirs[0]);
    const double q2 = directed_power(scn, st, scn.undesired_dirs[1]);
    const double expected = std::min(p1, p2) / (std::max(q1, q2) + scn.noise_power);
    CHECK_THAT(slnr(scn, st), Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("slnr is invariant to symbol power when noise is zero", "[beamform]") {
    auto scn = far_field(32, {deg_to_rad(-25.0)}, {deg_to_rad(15.0)});
    scn.noise_power = 0.0; // ratio-level check, bypasses the run-time validation
    Rng rng(41);
    const auto st = random_unit_state(32, rng);
    const double base = slnr(scn, st);
    scn.symbol_power *= 37.5;
    CHECK_THAT(slnr(scn, st), Catch::Matchers::WithinRel(base, 1e-12));
}

TEST_CASE("direction bank agrees with the direct evaluation", "[beamform]") {
    auto scn = far_field(48, {deg_to_rad(-30.0), deg_to_rad(-15.0)}, {deg_to_rad(20.0)});
    const DirectionBank bank(scn, scn.desired_dirs, scn.undesired_dirs);
    Rng rng(43);
    for (int i = 0; i < 10; ++i) {
        const auto st = random_unit_state(48, rng);
        REQUIRE_THAT(bank.slnr_linear(st), Catch::Matchers::WithinRel(slnr(scn, st), 1e-12));
    }
}

TEST_CASE("pattern grid covers the requested range", "[beamform]") {
    const auto grid = pattern_grid(deg_to_rad(-90.0), deg_to_rad(90.0), deg_to_rad(0.25));
    CHECK(grid.size() == 721);
    CHECK_THAT(grid.front(), Catch::Matchers::WithinAbs(deg_to_rad(-90.0), 1e-12));
    CHECK_THAT(grid.back(), Catch::Matchers::WithinAbs(deg_to_rad(90.0), 1e-9));
    const auto scn = far_field(8);
    ReflectionState st{std::vector<Complex>(8, Complex(1.0, 0.0))};
    CHECK(radiation_pattern(scn, st, grid).size() == 721);
    CHECK_THROWS_AS(radiation_pattern(scn, st, {}), std::invalid_argument);
}

TEST_CASE("scenario validation rejects bad inputs", "[beamform]") {
    auto scn = far_field(16, {deg_to_rad(-30.0)});
    CHECK_NOTHROW(scn.validate());
    scn.noise_power = 0.0;
    CHECK_THROWS_AS(scn.validate(), std::invalid_argument);
    scn.noise_power = 1.0;
    scn.desired_dirs.push_back(kPi);
    CHECK_THROWS_AS(scn.validate(), std::invalid_argument);
}

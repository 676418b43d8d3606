#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Dense>

#include "waveris/biasline.hpp"
#include "waveris/rng.hpp"

using namespace waveris;

namespace {

BiasLineGeometry paper_line(std::size_t m = 100, std::size_t n = 50) {
    return {m, 2, 2, 0.019, 12.9e6, n};
}

ModeWeights random_feasible_weights(const BiasLineGeometry& g, Rng& rng, double budget = 10.5) {
    // keep sum |W_n| below the bias span so the envelope stays in range
    ModeWeights w = ModeWeights::zeros(g.mode_count, -4.0);
    double left = budget;
    for (std::size_t n = 0; n < g.mode_count && left > 0.0; ++n) {
        const double a = left * rng.uniform01() * 0.4 * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        w.amplitude[n] = a;
        left -= std::abs(a);
    }
    return w;
}

// dense-time-grid reference for the envelope minimum
double dense_envelope_min(const BiasLineGeometry& g, const ModeWeights& w, std::size_t element,
                          std::size_t samples = 1000000) {
    Eigen::VectorXd amp(static_cast<Eigen::Index>(g.mode_count));
    for (std::size_t n = 1; n <= g.mode_count; ++n) {
        amp[static_cast<Eigen::Index>(n - 1)] =
            w.amplitude[n - 1] * g.spatial_sine(n, element);
    }
    double best = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double u = kTwoPi * static_cast<double>(j) / static_cast<double>(samples);
        double acc = 0.0;
        for (Eigen::Index n = 0; n < amp.size(); ++n) {
            if (amp[n] != 0.0) {
                acc += amp[n] * std::sin(static_cast<double>(n + 1) * u);
            }
        }
        best = std::min(best, acc);
    }
    return w.dc + best;
}

} // namespace

TEST_CASE("standing wave reduces to the DC term without modes", "[biasline]") {
    const auto g = paper_line(10, 4);
    const auto w = ModeWeights::zeros(4, -7.0);
    for (std::size_t m = 0; m < 10; ++m) {
        CHECK(standing_wave_value(g, w, m, 0.37e-6) == -7.0);
    }
}

TEST_CASE("all time factors vanish after half a fundamental period", "[biasline]") {
    const auto g = paper_line(10, 6);
    ModeWeights w = ModeWeights::zeros(6, -8.0);
    w.amplitude = {1.0, -2.0, 0.5, 3.0, -0.25, 1.5};
    const double t = kPi / g.omega_b();
    for (std::size_t m = 0; m < 10; ++m) {
        CHECK_THAT(standing_wave_value(g, w, m, t), Catch::Matchers::WithinAbs(-8.0, 1e-9));
    }
}

TEST_CASE("single-mode standing wave matches the hand-evaluated term", "[biasline]") {
    const auto g = paper_line();
    ModeWeights w = ModeWeights::zeros(50, 0.0);
    w.amplitude[9] = 9.0; // mode 10
    const double t = kPi / (2.0 * 10.0 * g.omega_b());
    const double expected = 9.0 * std::sin(10.0 * kPi * 51.0 / 103.0);
    CHECK_THAT(standing_wave_value(g, w, 49, t), Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("envelope of a single mode is the negative modulus", "[biasline]") {
    const auto g = paper_line(40, 12);
    ModeWeights w = ModeWeights::zeros(12, -4.0);
    w.amplitude[6] = 5.5;
    const BiasVoltages v = sample_envelope(g, w);
    for (std::size_t m = 0; m < 40; ++m) {
        const double expected = -4.0 - std::abs(5.5 * g.spatial_sine(7, m));
        REQUIRE_THAT(v.v[m], Catch::Matchers::WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("a full-swing mode drives an element to -13 V", "[biasline]") {
    // element 4 of a 9-element line sits at the quarter point: sin(pi/2) = 1
    BiasLineGeometry g{9, 0, 0, 0.019, 12.9e6, 1};
    ModeWeights w = ModeWeights::zeros(1, -4.0);
    w.amplitude[0] = 9.0;
    const BiasVoltages v = sample_envelope(g, w);
    CHECK_THAT(v.v[4], Catch::Matchers::WithinAbs(-13.0, 1e-12));
}

TEST_CASE("multi-mode envelope matches the dense-grid reference", "[biasline]") {
    const auto g = paper_line(16, 12);
    Rng rng(21);
    EnvelopeSampler sampler(g);
    for (int trial = 0; trial < 3; ++trial) {
        const ModeWeights w = random_feasible_weights(g, rng);
        const BiasVoltages v = sampler.sample(w);
        for (std::size_t m = 0; m < g.element_count; m += 5) {
            const double expected = dense_envelope_min(g, w, m);
            REQUIRE_THAT(v.v[m], Catch::Matchers::WithinAbs(expected, 1e-3));
            REQUIRE(v.v[m] <= expected + 1e-9); // never above the true minimum
        }
    }
}

TEST_CASE("envelope output is symmetric for equal extensions", "[biasline]") {
    const auto g = paper_line(30, 14);
    Rng rng(31);
    EnvelopeSampler sampler(g);
    for (int trial = 0; trial < 5; ++trial) {
        const ModeWeights w = random_feasible_weights(g, rng);
        const BiasVoltages v = sampler.sample(w);
        for (std::size_t m = 0; m < g.element_count; ++m) {
            REQUIRE_THAT(v.v[m],
                         Catch::Matchers::WithinAbs(v.v[g.element_count - 1 - m], 1e-12));
        }
    }
}

TEST_CASE("envelope respects the amplitude-sum lower bound", "[biasline]") {
    const auto g = paper_line(25, 10);
    Rng rng(41);
    EnvelopeSampler sampler(g);
    for (int trial = 0; trial < 10; ++trial) {
        const ModeWeights w = random_feasible_weights(g, rng);
        double budget = 0.0;
        for (double a : w.amplitude) {
            budget += std::abs(a);
        }
        const BiasVoltages v = sampler.sample(w);
        for (double x : v.v) {
            REQUIRE(x >= w.dc - budget - 1e-12);
            REQUIRE(x <= w.dc + 1e-12); // the minimum of a zero-mean sum is <= 0
        }
    }
}

TEST_CASE("envelope is invariant under negating a weight", "[biasline]") {
    const auto g = paper_line(20, 8);
    Rng rng(51);
    EnvelopeSampler sampler(g);
    ModeWeights w = random_feasible_weights(g, rng);
    ModeWeights flipped = w;
    for (auto& a : flipped.amplitude) {
        a = -a;
    }
    const BiasVoltages a = sampler.sample(w);
    const BiasVoltages b = sampler.sample(flipped);
    for (std::size_t m = 0; m < g.element_count; ++m) {
        REQUIRE_THAT(a.v[m], Catch::Matchers::WithinAbs(b.v[m], 1e-12));
    }
}

TEST_CASE("hold sampling is the DC term when no mode is active", "[biasline]") {
    const auto g = paper_line(12, 5);
    const auto v = sample_hold(g, ModeWeights::zeros(5, -9.5), 8.0 / g.omega_b());
    for (double x : v.v) {
        CHECK(x == -9.5);
    }
}

TEST_CASE("hold sampling is affine in the weights", "[biasline]") {
    const auto g = paper_line(20, 8);
    const double t0 = 8.0 / g.omega_b();
    Rng rng(61);
    ModeWeights w1 = random_feasible_weights(g, rng, 4.0);
    ModeWeights w2 = random_feasible_weights(g, rng, 4.0);
    ModeWeights sum = w1;
    sum.dc += w2.dc;
    for (std::size_t n = 0; n < sum.amplitude.size(); ++n) {
        sum.amplitude[n] += w2.amplitude[n];
    }
    const auto vs = sample_hold(g, sum, t0);
    const auto v1 = sample_hold(g, w1, t0);
    const auto v2 = sample_hold(g, w2, t0);
    for (std::size_t m = 0; m < g.element_count; ++m) {
        REQUIRE_THAT(vs.v[m], Catch::Matchers::WithinAbs(v1.v[m] + v2.v[m], 1e-9));
    }
}

TEST_CASE("the reference sampling instant leaves every mode visible", "[biasline]") {
    const auto g = paper_line(100, 50);
    CHECK_NOTHROW(check_sample_time(g, 8.0 / g.omega_b()));
    for (std::size_t n = 1; n <= 50; ++n) {
        CHECK(std::abs(std::sin(8.0 * static_cast<double>(n))) > 1e-9);
    }
}

TEST_CASE("a vanishing time factor is rejected naming the mode", "[biasline]") {
    const auto g = paper_line(10, 4);
    CHECK_THROWS_WITH(sample_hold(g, ModeWeights::zeros(4, -9.0), kPi / g.omega_b()),
                      Catch::Matchers::ContainsSubstring("n=1"));
    CHECK_THROWS_AS(sample_hold(g, ModeWeights::zeros(4, -9.0), 0.0), std::invalid_argument);
}

TEST_CASE("range validation reports indices and signed excess", "[biasline]") {
    BiasVoltages ok{std::vector<double>(8, -9.5)};
    CHECK(validate_range(ok).empty());

    BiasVoltages bad{{-9.0, -15.2, -9.0, -3.5}};
    const auto violations = validate_range(bad);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].element == 1);
    CHECK_THAT(violations[0].excess, Catch::Matchers::WithinAbs(-0.2, 1e-12));
    CHECK(violations[1].element == 3);
    CHECK_THAT(violations[1].excess, Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("bounded-budget envelopes always stay in range", "[biasline]") {
    const auto g = paper_line(30, 12);
    Rng rng(71);
    EnvelopeSampler sampler(g);
    for (int trial = 0; trial < 10; ++trial) {
        const ModeWeights w = random_feasible_weights(g, rng, 10.9);
        REQUIRE(validate_range(sampler.sample(w)).empty());
    }
}

TEST_CASE("mode index formulas match the worked cases", "[biasline]") {
    CHECK(mode_index_sh(100, 0.2, 0.0) == 0);
    CHECK(mode_index_sh(100, 0.2, deg_to_rad(-30.0)) == 20);
    CHECK(mode_index_sh(256, 0.2, deg_to_rad(-30.0)) == 51);
    CHECK(mode_index_pd(100, 0.2, deg_to_rad(-30.0)) == 10);
    CHECK(mode_index_pd(100, 0.2, 0.0) == 0);
    // -50 deg: |2*101*0.2*sin(-50)| = 30.95 -> 31, halved and rounded up
    CHECK(mode_index_sh(100, 0.2, deg_to_rad(-50.0)) == 31);
    CHECK(mode_index_pd(100, 0.2, deg_to_rad(-50.0)) == 16);
    CHECK_THROWS_AS(mode_index_sh(100, 0.2, kPi / 2.0), std::domain_error);
}

TEST_CASE("alternate span variant differs only at rounding boundaries", "[biasline]") {
    // the flagship case rounds identically
    CHECK(mode_index_sh(100, 0.2, deg_to_rad(-30.0), true) == 20);
    // a small array separates the two conventions
    CHECK(mode_index_sh(10, 0.25, deg_to_rad(30.0)) == 3);
    CHECK(mode_index_sh(10, 0.25, deg_to_rad(30.0), true) == 2);
}

TEST_CASE("fundamental frequency follows from slowness and length", "[biasline]") {
    // v_ph = c / n_slow; f_b = v_ph / (2 L_tot)
    const double f = fundamental_frequency(100.0, 1.976);
    CHECK_THAT(f, Catch::Matchers::WithinRel(kSpeedOfLight / 100.0 / (2.0 * 1.976), 1e-12));
}

TEST_CASE("geometry invariants are enforced", "[biasline]") {
    CHECK_THROWS_AS((BiasLineGeometry{1, 0, 0, 0.019, 12.9e6, 4}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((BiasLineGeometry{10, 0, 0, 0.019, 12.9e6, 0}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((BiasLineGeometry{10, 0, 0, -1.0, 12.9e6, 4}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((BiasLineGeometry{10, 0, 0, 0.019, 0.0, 4}).validate(),
                    std::invalid_argument);
}

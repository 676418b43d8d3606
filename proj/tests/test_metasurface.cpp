#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "waveris/metasurface.hpp"
#include "waveris/rng.hpp"

using namespace waveris;

namespace {

UnitCellCircuit lossless_cell() {
    UnitCellCircuit c = UnitCellCircuit::reference_cell();
    c.patch_resistance = 0.0;
    return c;
}

} // namespace

TEST_CASE("lossless impedance vanishes at the series resonance", "[metasurface]") {
    const UnitCellCircuit c = lossless_cell();
    const Complex z = equivalent_impedance(c, c.series_resonance());
    CHECK(std::abs(z) < 1e-6);
    // and diverges approaching the parallel resonance
    const Complex zp = equivalent_impedance(c, c.parallel_resonance() * (1.0 + 1e-9));
    CHECK(std::abs(zp) > 1e6);
    CHECK(c.parallel_resonance() < c.series_resonance());
}

TEST_CASE("direct and resonance forms of the unloaded impedance agree", "[metasurface]") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        UnitCellCircuit c;
        c.patch_resistance = 0.5 * rng.uniform01();
        c.patch_inductance = (0.1 + rng.uniform01()) * 1e-9;
        c.patch_capacitance = (0.1 + rng.uniform01()) * 1e-12;
        c.substrate_inductance = (0.5 + 2.0 * rng.uniform01()) * 1e-9;
        c.varactor_inductance = 2.34e-9;
        const double omega = kTwoPi * (0.5 + 14.0 * rng.uniform01()) * 1e9;
        const Complex a = equivalent_impedance(c, omega);
        const Complex b = equivalent_impedance_resonance_form(c, omega);
        REQUIRE(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("omega of zero is rejected", "[metasurface]") {
    CHECK_THROWS_AS(equivalent_impedance(UnitCellCircuit::reference_cell(), 0.0),
                    std::domain_error);
}

TEST_CASE("resonance inversion reproduces the reference constants", "[metasurface]") {
    const UnitCellCircuit ref = UnitCellCircuit::reference_cell();
    const double we = ref.series_resonance();
    const double wm = ref.parallel_resonance();
    const double h = ref.substrate_inductance / kMu0;
    // real part of the unloaded impedance at the parallel resonance
    const double re_z = equivalent_impedance(ref, wm).real();
    const UnitCellCircuit c = circuit_from_resonances(we, wm, h, re_z);
    CHECK_THAT(c.substrate_inductance, Catch::Matchers::WithinRel(1.6e-9, 1e-12));
    CHECK_THAT(c.patch_inductance, Catch::Matchers::WithinRel(0.39e-9, 1e-9));
    CHECK_THAT(c.patch_capacitance, Catch::Matchers::WithinRel(0.53e-12, 1e-9));
    CHECK_THAT(c.patch_resistance, Catch::Matchers::WithinRel(0.08, 1e-9));
}

TEST_CASE("resonance inversion round-trips", "[metasurface]") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double wm = kTwoPi * (1.0 + 5.0 * rng.uniform01()) * 1e9;
        const double we = wm * (1.2 + 2.0 * rng.uniform01());
        const double h = (0.5 + rng.uniform01()) * 1e-3;
        const UnitCellCircuit c = circuit_from_resonances(we, wm, h, 1e4);
        REQUIRE_THAT(c.series_resonance(), Catch::Matchers::WithinRel(we, 1e-12));
        REQUIRE_THAT(c.parallel_resonance(), Catch::Matchers::WithinRel(wm, 1e-12));
    }
}

TEST_CASE("an octave ratio makes the patch and substrate inductances equal", "[metasurface]") {
    const double wm = kTwoPi * 3e9;
    const UnitCellCircuit c = circuit_from_resonances(wm * std::sqrt(2.0), wm, 1e-9 / kMu0, 1e4);
    CHECK_THAT(c.patch_inductance, Catch::Matchers::WithinRel(c.substrate_inductance, 1e-9));
    CHECK_THAT(c.substrate_inductance, Catch::Matchers::WithinRel(1e-9, 1e-12));
}

TEST_CASE("swapped resonances are a domain error", "[metasurface]") {
    CHECK_THROWS_AS(circuit_from_resonances(kTwoPi * 2e9, kTwoPi * 5e9, 1e-3, 1e4),
                    std::domain_error);
    CHECK_THROWS_AS(circuit_from_resonances(kTwoPi * 5e9, kTwoPi * 5e9, 1e-3, 1e4),
                    std::domain_error);
}

TEST_CASE("open varactor branch reduces to the unloaded impedance", "[metasurface]") {
    const UnitCellCircuit c = UnitCellCircuit::reference_cell();
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const double omega = kTwoPi * (1.0 + 10.0 * rng.uniform01()) * 1e9;
        const Complex open = ris_impedance(c, 0.0, 0.0, omega);
        const Complex bare = equivalent_impedance(c, omega);
        REQUIRE(std::abs(open - bare) <= 1e-12 * std::abs(bare));
    }
}

TEST_CASE("lossless loaded network is purely reactive", "[metasurface]") {
    const UnitCellCircuit c = lossless_cell();
    const Complex z = ris_impedance(c, 0.46e-12, 0.0, kTwoPi * 3e9);
    CHECK(std::abs(z.real()) < 1e-9 * std::abs(z));
}

TEST_CASE("loaded impedance matches an independent evaluation", "[metasurface]") {
    // independently coded ladder: varactor series branch, gap capacitance,
    // patch branch, substrate shunt
    const UnitCellCircuit c = UnitCellCircuit::reference_cell();
    const double w = kTwoPi * 3e9;
    const double cv = 0.460e-12;
    const double rv = 0.005;
    const Complex z_var = Complex(rv, w * 2.34e-9 - 1.0 / (w * cv));
    const Complex z_gap = Complex(0.0, -1.0 / (w * 0.53e-12));
    const Complex inner = 1.0 / (1.0 / z_var + 1.0 / z_gap);
    const Complex z_patch = Complex(0.08, w * 0.39e-9) + inner;
    const Complex z_sub = Complex(0.0, w * 1.6e-9);
    const Complex expected = 1.0 / (1.0 / z_patch + 1.0 / z_sub);

    const Complex got = ris_impedance(c, cv, rv, w);
    CHECK(std::abs(got - expected) <= 1e-12 * std::abs(expected));

    const auto table = VaractorBiasTable::smv1231();
    const Complex phi = reflection_coefficient(c, table, -15.0, 3e9);
    const Complex phi_expected = (expected - c.line_impedance) / (expected + c.line_impedance);
    CHECK(std::abs(phi - phi_expected) <= 1e-12);
}

TEST_CASE("passivity holds across the bias and frequency ranges", "[metasurface]") {
    const UnitCellCircuit c = UnitCellCircuit::reference_cell();
    const auto table = VaractorBiasTable::smv1231();
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const double v = -15.0 + 11.0 * rng.uniform01();
        const double f = (1.0 + 11.0 * rng.uniform01()) * 1e9;
        REQUIRE(std::abs(reflection_coefficient(c, table, v, f)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("lossless reflection has unit magnitude", "[metasurface]") {
    const UnitCellCircuit c = lossless_cell();
    const auto source = VaractorBiasTable::smv1231();
    std::vector<VaractorRow> rows;
    for (const auto& r : source.rows()) {
        rows.push_back({r.bias_volt, r.capacitance_farad, 0.0});
    }
    const VaractorBiasTable lossless_table(rows, 0.45e-9);
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const double v = -15.0 + 11.0 * rng.uniform01();
        const double f = (2.0 + 2.0 * rng.uniform01()) * 1e9;
        REQUIRE_THAT(std::abs(reflection_coefficient(c, lossless_table, v, f)),
                     Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("attainable phase span exceeds 280 degrees in band", "[metasurface]") {
    const UnitCellCircuit c = UnitCellCircuit::reference_cell();
    const auto table = VaractorBiasTable::smv1231();
    double best = 0.0;
    for (double f = 2.6e9; f <= 3.0e9 + 1.0; f += 10e6) {
        double prev = 0.0;
        double offset = 0.0;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (double v = -15.0; v <= -4.0 + 1e-9; v += 0.01) {
            double ph = std::arg(reflection_coefficient(c, table, std::min(v, -4.0), f));
            if (!first) {
                while (ph + offset - prev > kPi) offset -= kTwoPi;
                while (ph + offset - prev < -kPi) offset += kTwoPi;
            }
            const double u = ph + offset;
            lo = first ? u : std::min(lo, u);
            hi = first ? u : std::max(hi, u);
            prev = u;
            first = false;
        }
        best = std::max(best, hi - lo);
    }
    CHECK(rad_to_deg(best) >= 280.0);
}

TEST_CASE("phase-voltage map at 3 GHz is strictly monotone", "[metasurface]") {
    const PhaseVoltageMap map(UnitCellCircuit::reference_cell(), VaractorBiasTable::smv1231(),
                              3e9);
    CHECK(map.size() == 2201);
    const auto& ph = map.phases();
    const bool increasing = ph.back() > ph.front();
    for (std::size_t i = 1; i < ph.size(); ++i) {
        REQUIRE((increasing ? ph[i] > ph[i - 1] : ph[i] < ph[i - 1]));
    }
    for (double m : map.magnitudes()) {
        REQUIRE(m <= 1.0 + 1e-12);
    }
}

TEST_CASE("far below resonance the map either fails or is nearly flat", "[metasurface]") {
    // behaviour recorded, not asserted: construction may reject 1 GHz
    try {
        const PhaseVoltageMap map(UnitCellCircuit::reference_cell(),
                                  VaractorBiasTable::smv1231(), 1e9);
        const double span = std::abs(map.phase_max() - map.phase_min());
        INFO("1 GHz map built with span " << rad_to_deg(span) << " deg");
        CHECK(span >= 0.0);
    } catch (const std::domain_error&) {
        SUCCEED("1 GHz map rejected as not one-to-one");
    }
}

TEST_CASE("phase targets clamp to the attainable span", "[metasurface]") {
    const PhaseVoltageMap map(UnitCellCircuit::reference_cell(), VaractorBiasTable::smv1231(),
                              3e9);
    const double v_at_min = map.voltage_of_phase(map.phase_min() - 0.05);
    const double v_at_max = map.voltage_of_phase(map.phase_max() + 0.05);
    CHECK_THAT(map.phase_of_voltage(v_at_min), Catch::Matchers::WithinAbs(map.phase_min(), 1e-9));
    CHECK_THAT(map.phase_of_voltage(v_at_max), Catch::Matchers::WithinAbs(map.phase_max(), 1e-9));
}

TEST_CASE("grid-point phases invert to the grid voltage", "[metasurface]") {
    const PhaseVoltageMap map(UnitCellCircuit::reference_cell(), VaractorBiasTable::smv1231(),
                              3e9);
    const std::size_t i = map.size() / 2; // V = -9.5 region
    const double v = map.voltage_at(i);
    CHECK_THAT(map.voltage_of_phase(map.phases()[i]), Catch::Matchers::WithinAbs(v, 0.0025));
}

TEST_CASE("phase/voltage round trip stays within one grid step", "[metasurface]") {
    const PhaseVoltageMap map(UnitCellCircuit::reference_cell(), VaractorBiasTable::smv1231(),
                              3e9);
    Rng rng(123);
    for (int i = 0; i < 300; ++i) {
        const double v = -15.0 + 11.0 * rng.uniform01();
        const double back = map.voltage_of_phase(map.phase_of_voltage(v));
        REQUIRE_THAT(back, Catch::Matchers::WithinAbs(v, 0.005));
    }
}

TEST_CASE("voltage_of_phase is monotone in the clamped target", "[metasurface]") {
    const PhaseVoltageMap map(UnitCellCircuit::reference_cell(), VaractorBiasTable::smv1231(),
                              3e9);
    double prev_v = map.voltage_of_phase(map.phase_min());
    const int steps = 200;
    for (int i = 1; i <= steps; ++i) {
        const double target =
            map.phase_min() + (map.phase_max() - map.phase_min()) * i / double(steps);
        const double v = map.voltage_of_phase(target);
        // phase falls with rising voltage at 3 GHz, so the inverse must fall
        REQUIRE(v <= prev_v + 1e-12);
        prev_v = v;
    }
}

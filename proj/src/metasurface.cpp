#include "waveris/metasurface.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace waveris {

namespace {

Complex parallel(Complex a, Complex b) { return a * b / (a + b); }

} // namespace

double UnitCellCircuit::series_resonance() const {
    return 1.0 / std::sqrt(patch_inductance * patch_capacitance);
}

double UnitCellCircuit::parallel_resonance() const {
    return 1.0 / std::sqrt((patch_inductance + substrate_inductance) * patch_capacitance);
}

void UnitCellCircuit::validate() const {
    if (patch_resistance < 0.0) {
        throw std::invalid_argument("unit cell: resistance must be >= 0");
    }
    if (patch_inductance <= 0.0 || patch_capacitance <= 0.0 || substrate_inductance <= 0.0 ||
        varactor_inductance <= 0.0) {
        throw std::invalid_argument("unit cell: inductances and capacitances must be > 0");
    }
    if (line_impedance <= 0.0) {
        throw std::invalid_argument("unit cell: line impedance must be > 0");
    }
}

UnitCellCircuit UnitCellCircuit::reference_cell() {
    UnitCellCircuit c;
    c.patch_resistance = 0.08;
    c.patch_inductance = 0.39e-9;
    c.patch_capacitance = 0.53e-12;
    c.substrate_inductance = 1.6e-9;
    c.varactor_inductance = 2.34e-9;
    return c;
}

Complex equivalent_impedance(const UnitCellCircuit& circuit, double omega) {
    if (omega <= 0.0) {
        throw std::domain_error("equivalent_impedance: omega must be > 0");
    }
    const Complex jwl_d(0.0, omega * circuit.patch_inductance);
    const Complex jwl_s(0.0, omega * circuit.substrate_inductance);
    const Complex cap(0.0, -1.0 / (omega * circuit.patch_capacitance));
    return parallel(circuit.patch_resistance + jwl_d + cap, jwl_s);
}

Complex equivalent_impedance_resonance_form(const UnitCellCircuit& circuit, double omega) {
    if (omega <= 0.0) {
        throw std::domain_error("equivalent_impedance: omega must be > 0");
    }
    const double we = circuit.series_resonance();
    const double wm = circuit.parallel_resonance();
    const Complex jwrc(0.0, omega * circuit.patch_resistance * circuit.patch_capacitance);
    const Complex num = 1.0 + jwrc - (omega / we) * (omega / we);
    const Complex den = 1.0 + jwrc - (omega / wm) * (omega / wm);
    return Complex(0.0, omega * circuit.substrate_inductance) * num / den;
}

UnitCellCircuit circuit_from_resonances(double omega_e, double omega_m,
                                        double substrate_height_m,
                                        double re_zeq_at_parallel_resonance) {
    if (omega_m <= 0.0 || omega_e <= omega_m) {
        throw std::domain_error(
            "circuit_from_resonances: requires omega_e > omega_m > 0 (L_d would be negative)");
    }
    if (substrate_height_m <= 0.0) {
        throw std::domain_error("circuit_from_resonances: substrate height must be > 0");
    }
    if (re_zeq_at_parallel_resonance <= 0.0) {
        throw std::domain_error("circuit_from_resonances: Re(Z_eq) at resonance must be > 0");
    }
    UnitCellCircuit c;
    c.substrate_inductance = kMu0 * substrate_height_m;
    const double ratio2 = (omega_e / omega_m) * (omega_e / omega_m);
    c.patch_inductance = c.substrate_inductance / (ratio2 - 1.0);
    c.patch_capacitance = 1.0 / (c.patch_inductance * omega_e * omega_e);
    c.patch_resistance =
        c.substrate_inductance /
        (c.patch_capacitance * (1.0 + c.patch_inductance / c.substrate_inductance) *
         re_zeq_at_parallel_resonance);
    c.varactor_inductance = UnitCellCircuit::reference_cell().varactor_inductance;
    return c;
}

Complex ris_impedance(const UnitCellCircuit& circuit, double capacitance_farad,
                      double resistance_ohm, double omega) {
    if (omega <= 0.0) {
        throw std::domain_error("ris_impedance: omega must be > 0");
    }
    if (resistance_ohm < 0.0) {
        throw std::domain_error("ris_impedance: varactor resistance must be >= 0");
    }
    const Complex jwl_d(0.0, omega * circuit.patch_inductance);
    const Complex jwl_s(0.0, omega * circuit.substrate_inductance);
    const Complex patch_cap(0.0, -1.0 / (omega * circuit.patch_capacitance));
    Complex gap;
    if (capacitance_farad > 0.0) {
        const Complex varactor_branch =
            resistance_ohm + Complex(0.0, omega * circuit.varactor_inductance) +
            Complex(0.0, -1.0 / (omega * capacitance_farad));
        gap = parallel(varactor_branch, patch_cap);
    } else {
        // open varactor branch: only the gap capacitance remains
        gap = patch_cap;
    }
    return parallel(circuit.patch_resistance + jwl_d + gap, jwl_s);
}

Complex reflection_coefficient(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                               double bias_volt, double frequency_hz) {
    if (frequency_hz <= 0.0) {
        throw std::domain_error("reflection_coefficient: frequency must be > 0");
    }
    const VaractorParams p = table.at(bias_volt);
    const Complex z = ris_impedance(circuit, p.capacitance_farad, p.resistance_ohm,
                                    kTwoPi * frequency_hz);
    return (z - circuit.line_impedance) / (z + circuit.line_impedance);
}

PhaseVoltageMap::PhaseVoltageMap(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                                 double frequency_hz)
    : frequency_(frequency_hz), v_min_(table.min_bias()), v_max_(table.max_bias()) {
    const auto count =
        static_cast<std::size_t>(std::llround((v_max_ - v_min_) / kVoltageStep)) + 1;
    phase_.reserve(count);
    magnitude_.reserve(count);
    double prev = 0.0;
    double offset = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = std::min(v_min_ + static_cast<double>(i) * kVoltageStep, v_max_);
        const Complex phi = reflection_coefficient(circuit, table, v, frequency_hz);
        double ph = std::arg(phi);
        if (i > 0) {
            // unwrap along the voltage grid
            double d = ph + offset - prev;
            while (d > kPi) {
                offset -= kTwoPi;
                d -= kTwoPi;
            }
            while (d < -kPi) {
                offset += kTwoPi;
                d += kTwoPi;
            }
        }
        phase_.push_back(ph + offset);
        magnitude_.push_back(std::abs(phi));
        prev = ph + offset;
    }
    increasing_ = phase_.back() > phase_.front();
    for (std::size_t i = 1; i < phase_.size(); ++i) {
        const double d = phase_[i] - phase_[i - 1];
        if ((increasing_ && d <= 0.0) || (!increasing_ && d >= 0.0)) {
            std::ostringstream msg;
            msg << "phase-voltage map not one-to-one at " << frequency_hz / 1e9 << " GHz near V="
                << voltage_at(i) << " V";
            throw std::domain_error(msg.str());
        }
    }
    phase_min_ = increasing_ ? phase_.front() : phase_.back();
    phase_max_ = increasing_ ? phase_.back() : phase_.front();
}

double PhaseVoltageMap::phase_of_voltage(double bias_volt) const {
    if (bias_volt < v_min_ || bias_volt > v_max_) {
        throw std::out_of_range("phase_of_voltage: bias voltage outside table range");
    }
    const double pos = (bias_volt - v_min_) / kVoltageStep;
    const auto i = std::min(static_cast<std::size_t>(pos), phase_.size() - 2);
    const double t = pos - static_cast<double>(i);
    return phase_[i] + t * (phase_[i + 1] - phase_[i]);
}

double PhaseVoltageMap::voltage_of_phase(double target_phase) const {
    double shifted = 0.0;
    if (phase_min_ >= -kPi && phase_max_ <= kPi) {
        // attainable span lies inside the principal range: straight clamp of
        // the principal target
        shifted = std::remainder(target_phase, kTwoPi);
    } else {
        // wrapped span: pick the 2*pi representative nearest the span first
        const double mid = 0.5 * (phase_min_ + phase_max_);
        shifted = target_phase + kTwoPi * std::round((mid - target_phase) / kTwoPi);
    }
    const double clamped = std::min(std::max(shifted, phase_min_), phase_max_);

    std::size_t lo = 0;
    std::size_t hi = phase_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t m = (lo + hi) / 2;
        const bool go_right = increasing_ ? (phase_[m] <= clamped) : (phase_[m] >= clamped);
        if (go_right) {
            lo = m;
        } else {
            hi = m;
        }
    }
    const double p0 = phase_[lo];
    const double p1 = phase_[hi];
    const double t = (p1 == p0) ? 0.0 : (clamped - p0) / (p1 - p0);
    return std::min(std::max(voltage_at(lo) + t * kVoltageStep, v_min_), v_max_);
}

CellResponse::CellResponse(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                           double frequency_hz)
    : circuit_(circuit), table_(table), frequency_(frequency_hz) {
    if (frequency_hz <= 0.0) {
        throw std::domain_error("cell response: frequency must be > 0");
    }
    circuit_.validate();
    omega_ = kTwoPi * frequency_hz;
    jwl_s_ = Complex(0.0, omega_ * circuit_.substrate_inductance);
    patch_cap_ = Complex(0.0, -1.0 / (omega_ * circuit_.patch_capacitance));
    patch_branch_ = Complex(circuit_.patch_resistance, omega_ * circuit_.patch_inductance);
    jwl_v_ = Complex(0.0, omega_ * circuit_.varactor_inductance);
}

Complex CellResponse::reflection(double bias_volt) const {
    const VaractorParams p = table_.at(bias_volt);
    const Complex varactor_branch =
        p.resistance_ohm + jwl_v_ + Complex(0.0, -1.0 / (omega_ * p.capacitance_farad));
    const Complex gap = parallel(varactor_branch, patch_cap_);
    const Complex z = parallel(patch_branch_ + gap, jwl_s_);
    return (z - circuit_.line_impedance) / (z + circuit_.line_impedance);
}

std::vector<Complex> CellResponse::reflections(const std::vector<double>& bias_volts) const {
    std::vector<Complex> out;
    out.reserve(bias_volts.size());
    for (double v : bias_volts) {
        out.push_back(reflection(v));
    }
    return out;
}

} // namespace waveris

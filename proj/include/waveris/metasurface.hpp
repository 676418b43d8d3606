#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "waveris/constants.hpp"
#include "waveris/varactor.hpp"

namespace waveris {

using Complex = std::complex<double>;

// Equivalent circuit of one unit cell. The patch branch (R_d, L_d, C_d) in
// parallel with the grounded-substrate inductance L_s defines two resonances:
// a series one at omega_e = 1/sqrt(L_d C_d) where the lossless impedance
// vanishes (reflection phase 180 deg), and a parallel one at
// omega_m = 1/sqrt((L_d + L_s) C_d) below it where the impedance diverges
// (phase 0 deg). L_v is the total inductance of the varactor branch, package
// plus mounting parasitics.
struct UnitCellCircuit {
    double patch_resistance = 0.0;     // R_d, ohm
    double patch_inductance = 0.0;     // L_d, henry
    double patch_capacitance = 0.0;    // C_d, farad
    double substrate_inductance = 0.0; // L_s, henry
    double varactor_inductance = 0.0;  // L_v, henry
    double line_impedance = kFreeSpaceImpedance; // Z_0, ohm

    double series_resonance() const;   // omega_e, rad/s
    double parallel_resonance() const; // omega_m, rad/s

    void validate() const; // throws std::invalid_argument

    // The cell this project models throughout: L_s = 1.6 nH, L_d = 0.39 nH,
    // C_d = 0.53 pF, R_d = 0.08 ohm, L_v = 2.34 nH.
    static UnitCellCircuit reference_cell();
};

// Patch-plus-substrate impedance (varactor absent):
// (R_d + jwL_d + 1/(jwC_d)) || jwL_s. Throws std::domain_error for w <= 0.
Complex equivalent_impedance(const UnitCellCircuit& circuit, double omega);

// Same impedance written in terms of the two resonances; agrees with
// equivalent_impedance to ~1e-12 relative and exists as an independent
// algebraic route for testing.
Complex equivalent_impedance_resonance_form(const UnitCellCircuit& circuit, double omega);

// Recovers circuit constants from the resonances: L_s = mu0*h,
// L_d = L_s/((we/wm)^2 - 1), C_d = 1/(L_d we^2),
// R_d = L_s/(C_d (1 + L_d/L_s) Re(Z_eq(wm))).
// Requires omega_e > omega_m > 0 (L_d would be negative otherwise).
UnitCellCircuit circuit_from_resonances(double omega_e, double omega_m,
                                        double substrate_height_m,
                                        double re_zeq_at_parallel_resonance);

// Loaded-cell impedance: varactor series branch (R_v + jwL_v + 1/(jwC_v))
// in parallel with 1/(jwC_d), in series with R_d + jwL_d, all in parallel
// with jwL_s. A non-positive C_v selects the open-branch limit and reduces
// to equivalent_impedance.
Complex ris_impedance(const UnitCellCircuit& circuit, double capacitance_farad,
                      double resistance_ohm, double omega);

// phi = (Z_RIS - Z_0)/(Z_RIS + Z_0) at the given bias voltage and frequency.
Complex reflection_coefficient(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                               double bias_volt, double frequency_hz);

// One-to-one phase <-> voltage map at a fixed frequency, sampled on a uniform
// voltage grid and unwrapped along it. Construction fails if the unwrapped
// phase is not strictly monotone (the inverse would be ill-defined).
class PhaseVoltageMap {
  public:
    static constexpr double kVoltageStep = 0.005; // 5 mV

    PhaseVoltageMap(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                    double frequency_hz);

    double frequency() const { return frequency_; }
    std::size_t size() const { return phase_.size(); }
    double voltage_at(std::size_t i) const {
        return std::min(v_min_ + static_cast<double>(i) * kVoltageStep, v_max_);
    }
    double min_voltage() const { return v_min_; }
    double max_voltage() const { return v_max_; }
    const std::vector<double>& phases() const { return phase_; }
    const std::vector<double>& magnitudes() const { return magnitude_; }
    double phase_min() const { return phase_min_; }
    double phase_max() const { return phase_max_; }

    // Unwrapped phase at an arbitrary in-range voltage (linear between grid points).
    double phase_of_voltage(double bias_volt) const;

    // Inverse map. The target is first shifted by a multiple of 2*pi to the
    // representative nearest the attainable interval, then clamped to
    // [phase_min, phase_max], then inverted by linear interpolation.
    double voltage_of_phase(double target_phase) const;

  private:
    double frequency_ = 0.0;
    double v_min_ = 0.0;
    double v_max_ = 0.0;
    std::vector<double> phase_;     // unwrapped, strictly monotone in V
    std::vector<double> magnitude_; // |phi| at each grid voltage
    double phase_min_ = 0.0;
    double phase_max_ = 0.0;
    bool increasing_ = false;
};

// Exact reflection evaluator bound to one frequency; precomputes the
// frequency-dependent circuit terms so per-voltage evaluation stays cheap
// inside optimizer loops.
class CellResponse {
  public:
    CellResponse(const UnitCellCircuit& circuit, const VaractorBiasTable& table,
                 double frequency_hz);

    double frequency() const { return frequency_; }
    const UnitCellCircuit& circuit() const { return circuit_; }
    const VaractorBiasTable& table() const { return table_; }

    Complex reflection(double bias_volt) const;
    std::vector<Complex> reflections(const std::vector<double>& bias_volts) const;

  private:
    UnitCellCircuit circuit_;
    VaractorBiasTable table_;
    double frequency_ = 0.0;
    double omega_ = 0.0;
    Complex jwl_s_;
    Complex patch_cap_;
    Complex patch_branch_; // R_d + jwL_d
    Complex jwl_v_;
};

} // namespace waveris

#pragma once

#include <complex>
#include <vector>

#include "waveris/constants.hpp"

namespace waveris {

using Complex = std::complex<double>;

// Far-field scenario for one row of M elements under normal incidence from
// the transmitter (incident channel all-ones, line-of-sight to every
// receiver direction).
struct ArrayScenario {
    std::size_t element_count = 0;      // M
    double spacing_wavelengths = 0.0;   // delta
    double symbol_power = 1.0;          // rho_s, linear
    double noise_power = 1.0;           // sigma_s^2, linear
    std::vector<double> desired_dirs;   // radians
    std::vector<double> undesired_dirs; // radians

    void validate() const; // throws std::invalid_argument

    double kappa(double theta_rad) const {
        return kTwoPi * spacing_wavelengths * std::sin(theta_rad);
    }
};

struct ReflectionState {
    std::vector<Complex> phi; // one per element, |phi| <= 1 for passive cells
};

// Entry m is e^{-j m kappa(theta)}.
std::vector<Complex> steering_channel(const ArrayScenario& scenario, double theta_rad);

// rho_s |sum_m phi(m) e^{-j m kappa(theta)}|^2
double directed_power(const ArrayScenario& scenario, const ReflectionState& state,
                      double theta_rad);

struct PatternPoint {
    double theta_rad = 0.0;
    double gain_db = 0.0;
};

std::vector<PatternPoint> radiation_pattern(const ArrayScenario& scenario,
                                            const ReflectionState& state,
                                            const std::vector<double>& theta_grid_rad);

std::vector<double> pattern_grid(double start_rad, double stop_rad, double step_rad);

// directed power over noise power
double snr(const ArrayScenario& scenario, const ReflectionState& state, double theta_rad);

// Worst-case ratio: weakest desired beam over (strongest leakage + noise).
// With no undesired directions the denominator is the noise power alone.
double slnr(const ArrayScenario& scenario, const ReflectionState& state);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

// Precomputed steering rows for a fixed set of directions; used by the
// optimisers that evaluate the same beams and nulls thousands of times.
class DirectionBank {
  public:
    DirectionBank(const ArrayScenario& scenario, const std::vector<double>& desired,
                  const std::vector<double>& undesired);

    double slnr_linear(const ReflectionState& state) const;
    double min_desired_power(const ReflectionState& state) const;
    double max_undesired_power(const ReflectionState& state) const;

  private:
    double power(const std::vector<Complex>& steer, const ReflectionState& state) const;

    double symbol_power_ = 1.0;
    double noise_power_ = 1.0;
    std::vector<std::vector<Complex>> desired_;
    std::vector<std::vector<Complex>> undesired_;
};

} // namespace waveris

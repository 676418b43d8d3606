#include "waveris/beamform.hpp"

#include <cmath>
#include <stdexcept>

namespace waveris {

void ArrayScenario::validate() const {
    if (element_count < 1) {
        throw std::invalid_argument("scenario: element count must be >= 1");
    }
    if (spacing_wavelengths <= 0.0) {
        throw std::invalid_argument("scenario: element spacing must be > 0");
    }
    if (symbol_power <= 0.0 || noise_power <= 0.0) {
        throw std::invalid_argument("scenario: powers must be > 0");
    }
    for (double th : desired_dirs) {
        if (std::abs(th) >= kPi / 2.0) {
            throw std::invalid_argument("scenario: desired direction outside (-90, 90) deg");
        }
    }
    for (double th : undesired_dirs) {
        if (std::abs(th) >= kPi / 2.0) {
            throw std::invalid_argument("scenario: undesired direction outside (-90, 90) deg");
        }
    }
}

std::vector<Complex> steering_channel(const ArrayScenario& scenario, double theta_rad) {
    if (std::abs(theta_rad) >= kPi / 2.0) {
        throw std::domain_error("steering_channel: |theta| must be < pi/2");
    }
    const double k = scenario.kappa(theta_rad);
    std::vector<Complex> h(scenario.element_count);
    for (std::size_t m = 0; m < scenario.element_count; ++m) {
        const double a = -static_cast<double>(m) * k;
        h[m] = Complex(std::cos(a), std::sin(a));
    }
    return h;
}

double directed_power(const ArrayScenario& scenario, const ReflectionState& state,
                      double theta_rad) {
    if (state.phi.size() != scenario.element_count) {
        throw std::invalid_argument("directed_power: state size does not match scenario");
    }
    const double k = scenario.kappa(theta_rad);
    Complex acc(0.0, 0.0);
    for (std::size_t m = 0; m < state.phi.size(); ++m) {
        const double a = -static_cast<double>(m) * k;
        acc += state.phi[m] * Complex(std::cos(a), std::sin(a));
    }
    return scenario.symbol_power * std::norm(acc);
}

std::vector<PatternPoint> radiation_pattern(const ArrayScenario& scenario,
                                            const ReflectionState& state,
                                            const std::vector<double>& theta_grid_rad) {
    if (theta_grid_rad.empty()) {
        throw std::invalid_argument("radiation_pattern: empty grid");
    }
    std::vector<PatternPoint> out;
    out.reserve(theta_grid_rad.size());
    for (double th : theta_grid_rad) {
        out.push_back({th, to_db(directed_power(scenario, state, th))});
    }
    return out;
}

std::vector<double> pattern_grid(double start_rad, double stop_rad, double step_rad) {
    if (step_rad <= 0.0 || stop_rad < start_rad) {
        throw std::invalid_argument("pattern_grid: bad range");
    }
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((stop_rad - start_rad) / step_rad + 0.5));
    grid.reserve(count + 1);
    for (std::size_t i = 0; i <= count; ++i) {
        grid.push_back(start_rad + static_cast<double>(i) * step_rad);
    }
    return grid;
}

double snr(const ArrayScenario& scenario, const ReflectionState& state, double theta_rad) {
    return directed_power(scenario, state, theta_rad) / scenario.noise_power;
}

double slnr(const ArrayScenario& scenario, const ReflectionState& state) {
    if (scenario.desired_dirs.empty()) {
        throw std::invalid_argument("slnr: scenario has no desired directions");
    }
    double num = 0.0;
    bool first = true;
    for (double th : scenario.desired_dirs) {
        const double p = directed_power(scenario, state, th);
        num = first ? p : std::min(num, p);
        first = false;
    }
    double leak = 0.0;
    for (double th : scenario.undesired_dirs) {
        leak = std::max(leak, directed_power(scenario, state, th));
    }
    return num / (leak + scenario.noise_power);
}

DirectionBank::DirectionBank(const ArrayScenario& scenario, const std::vector<double>& desired,
                             const std::vector<double>& undesired)
    : symbol_power_(scenario.symbol_power), noise_power_(scenario.noise_power) {
    if (desired.empty()) {
        throw std::invalid_argument("direction bank: no desired directions");
    }
    for (double th : desired) {
        desired_.push_back(steering_channel(scenario, th));
    }
    for (double th : undesired) {
        undesired_.push_back(steering_channel(scenario, th));
    }
}

double DirectionBank::power(const std::vector<Complex>& steer, const ReflectionState& state) const {
    Complex acc(0.0, 0.0);
    for (std::size_t m = 0; m < steer.size(); ++m) {
        acc += state.phi[m] * steer[m];
    }
    return symbol_power_ * std::norm(acc);
}

double DirectionBank::min_desired_power(const ReflectionState& state) const {
    double num = power(desired_[0], state);
    for (std::size_t i = 1; i < desired_.size(); ++i) {
        num = std::min(num, power(desired_[i], state));
    }
    return num;
}

double DirectionBank::max_undesired_power(const ReflectionState& state) const {
    double leak = 0.0;
    for (const auto& steer : undesired_) {
        leak = std::max(leak, power(steer, state));
    }
    return leak;
}

double DirectionBank::slnr_linear(const ReflectionState& state) const {
    return min_desired_power(state) / (max_undesired_power(state) + noise_power_);
}

} // namespace waveris

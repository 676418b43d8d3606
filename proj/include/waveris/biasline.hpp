#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "waveris/constants.hpp"

namespace waveris {

// Geometry of the biasing transmission line. The line spans the M powered
// elements plus M_l and M_r extension segments that carry no varactors; the
// spatial sines are pinned to zero at the line ends, not at the array ends.
struct BiasLineGeometry {
    std::size_t element_count = 0;   // M
    std::size_t left_extension = 0;  // M_l
    std::size_t right_extension = 0; // M_r
    double element_spacing = 0.0;    // d_x, meters
    double fundamental_freq = 0.0;   // f_b, hertz
    std::size_t mode_count = 0;      // N

    void validate() const; // throws std::invalid_argument

    double denominator() const {
        return static_cast<double>(element_count - 1 + left_extension + right_extension);
    }
    double omega_b() const { return kTwoPi * fundamental_freq; }

    // sin(n pi (m + M_l) / (M - 1 + M_l + M_r)), n is 1-based
    double spatial_sine(std::size_t mode, std::size_t element) const;
};

// Fundamental standing-wave frequency for a line of the given electrical
// length: f_b = v_ph / (2 L_tot) with v_ph = c / n_slow.
double fundamental_frequency(double slowness_factor, double total_line_length_m);

// Mode amplitudes (W_0 DC term plus W_1..W_N).
struct ModeWeights {
    double dc = 0.0;                // W_0, volts
    std::vector<double> amplitude;  // W_1..W_N, volts

    static ModeWeights zeros(std::size_t mode_count, double dc_volt) {
        return {dc_volt, std::vector<double>(mode_count, 0.0)};
    }
};

struct BiasVoltages {
    std::vector<double> v; // per element, volts
};

struct RangeViolation {
    std::size_t element = 0;
    double excess = 0.0; // signed: negative below the lower bound, positive above the upper
};

inline constexpr double kBiasMinVolt = -15.0;
inline constexpr double kBiasMaxVolt = -4.0;

std::vector<RangeViolation> validate_range(const BiasVoltages& voltages,
                                           double lo = kBiasMinVolt, double hi = kBiasMaxVolt);

// Instantaneous line voltage at element m and time t.
double standing_wave_value(const BiasLineGeometry& geometry, const ModeWeights& weights,
                           std::size_t element, double time_s);

struct EnvelopeDetector {};

struct SampleAndHold {
    double sample_time = 0.0; // t_0, seconds
};

using SamplerKind = std::variant<EnvelopeDetector, SampleAndHold>;

// Throws std::invalid_argument naming the first mode whose time factor
// sin(n omega_b t_0) vanishes; such a mode would be invisible to the sampler.
void check_sample_time(const BiasLineGeometry& geometry, double sample_time_s);

// Rectifier abstraction: per element, the DC bias is W_0 plus the most
// negative value the AC sum takes over one fundamental period. Minimised on a
// uniform time grid, then each candidate basin is polished with golden-section
// search; single-mode inputs use the exact closed form W_0 - |amplitude|.
// Reusable across calls; not safe for concurrent use of one instance.
class EnvelopeSampler {
  public:
    explicit EnvelopeSampler(const BiasLineGeometry& geometry);

    const BiasLineGeometry& geometry() const { return geometry_; }
    BiasVoltages sample(const ModeWeights& weights);

  private:
    BiasLineGeometry geometry_;
    Eigen::MatrixXd spatial_;   // M x N spatial sines
    Eigen::MatrixXd time_grid_; // N x T values of sin(n u_j)
    Eigen::MatrixXd scaled_;    // workspace, M x N
    Eigen::MatrixXd values_;    // workspace, M x T
    std::size_t grid_size_ = 0;
};

// Sample-and-hold abstraction: reads the line at one shared instant, so the
// bias is affine in the weights: v(m) = W_0 + sum_n W_n s_n(m) sin(n w_b t0).
class HoldSampler {
  public:
    HoldSampler(const BiasLineGeometry& geometry, double sample_time_s);

    const BiasLineGeometry& geometry() const { return geometry_; }
    double sample_time() const { return sample_time_; }
    // feature vector s_m of time-weighted spatial sines for element m
    Eigen::VectorXd feature(std::size_t element) const;
    const Eigen::MatrixXd& feature_matrix() const { return features_; }
    BiasVoltages sample(const ModeWeights& weights) const;

  private:
    BiasLineGeometry geometry_;
    double sample_time_ = 0.0;
    Eigen::MatrixXd features_; // M x N, spatial sine * time factor
};

// Uniform front end over the two sampler disciplines.
class BiasSampler {
  public:
    BiasSampler(const BiasLineGeometry& geometry, const SamplerKind& kind);

    bool is_envelope() const { return std::holds_alternative<EnvelopeSampler>(impl_); }
    const BiasLineGeometry& geometry() const;
    BiasVoltages sample(const ModeWeights& weights);

  private:
    std::variant<HoldSampler, EnvelopeSampler> impl_;
};

// One-off conveniences; construct a sampler internally.
BiasVoltages sample_envelope(const BiasLineGeometry& geometry, const ModeWeights& weights);
BiasVoltages sample_hold(const BiasLineGeometry& geometry, const ModeWeights& weights,
                         double sample_time_s);

// Mode index whose single-mode pattern peaks at +-theta for the
// sample-and-hold discipline: round(|2 (M+1) delta sin(theta)|). The
// alternate_span flag switches the factor to (M-1), the variant implied by
// the line-length derivation; both round to the same integer in the cases
// this project targets.
long mode_index_sh(std::size_t element_count, double spacing_wavelengths, double theta_rad,
                   bool alternate_span = false);

// Envelope-detector counterpart: the short-circuited line folds the wave, so
// peaks appear at twice the spatial frequency and the index halves. Returns 0
// for broadside (no oscillating mode needed); otherwise at least 1.
long mode_index_pd(std::size_t element_count, double spacing_wavelengths, double theta_rad,
                   bool alternate_span = false);

} // namespace waveris

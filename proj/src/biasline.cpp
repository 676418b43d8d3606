#include "waveris/biasline.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace waveris {

void BiasLineGeometry::validate() const {
    if (element_count < 2) {
        throw std::invalid_argument("bias line: element count must be >= 2");
    }
    if (mode_count < 1) {
        throw std::invalid_argument("bias line: mode count must be >= 1");
    }
    if (element_spacing <= 0.0) {
        throw std::invalid_argument("bias line: element spacing must be > 0");
    }
    if (fundamental_freq <= 0.0) {
        throw std::invalid_argument("bias line: fundamental frequency must be > 0");
    }
}

double BiasLineGeometry::spatial_sine(std::size_t mode, std::size_t element) const {
    return std::sin(static_cast<double>(mode) * kPi *
                    static_cast<double>(element + left_extension) / denominator());
}

double fundamental_frequency(double slowness_factor, double total_line_length_m) {
    if (slowness_factor <= 0.0 || total_line_length_m <= 0.0) {
        throw std::invalid_argument("fundamental_frequency: arguments must be > 0");
    }
    return kSpeedOfLight / slowness_factor / (2.0 * total_line_length_m);
}

std::vector<RangeViolation> validate_range(const BiasVoltages& voltages, double lo, double hi) {
    std::vector<RangeViolation> out;
    for (std::size_t m = 0; m < voltages.v.size(); ++m) {
        if (voltages.v[m] < lo) {
            out.push_back({m, voltages.v[m] - lo});
        } else if (voltages.v[m] > hi) {
            out.push_back({m, voltages.v[m] - hi});
        }
    }
    return out;
}

double standing_wave_value(const BiasLineGeometry& geometry, const ModeWeights& weights,
                           std::size_t element, double time_s) {
    if (element >= geometry.element_count) {
        throw std::out_of_range("standing_wave_value: element index out of range");
    }
    if (weights.amplitude.size() != geometry.mode_count) {
        throw std::invalid_argument("standing_wave_value: weight count does not match geometry");
    }
    const double wt = geometry.omega_b() * time_s;
    double acc = weights.dc;
    for (std::size_t n = 1; n <= geometry.mode_count; ++n) {
        acc += weights.amplitude[n - 1] * geometry.spatial_sine(n, element) *
               std::sin(static_cast<double>(n) * wt);
    }
    return acc;
}

void check_sample_time(const BiasLineGeometry& geometry, double sample_time_s) {
    const double wt = geometry.omega_b() * sample_time_s;
    for (std::size_t n = 1; n <= geometry.mode_count; ++n) {
        if (std::abs(std::sin(static_cast<double>(n) * wt)) < 1e-9) {
            throw std::invalid_argument("sample time factor sin(n*omega_b*t0) vanishes for n=" +
                                        std::to_string(n));
        }
    }
}

namespace {

std::size_t envelope_grid_size(std::size_t mode_count) {
    std::size_t want = std::max<std::size_t>(4096, 64 * mode_count);
    std::size_t t = 1;
    while (t < want) {
        t <<= 1;
    }
    return t;
}

// golden-section minimisation of the AC sum over [lo, hi]
double golden_min(const Eigen::VectorXd& amplitude, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    const auto eval = [&](double u) {
        double acc = 0.0;
        for (Eigen::Index n = 0; n < amplitude.size(); ++n) {
            if (amplitude[n] != 0.0) {
                acc += amplitude[n] * std::sin(static_cast<double>(n + 1) * u);
            }
        }
        return acc;
    };
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 60 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    return std::min(fc, fd);
}

} // namespace

EnvelopeSampler::EnvelopeSampler(const BiasLineGeometry& geometry) : geometry_(geometry) {
    geometry_.validate();
    const auto m_count = static_cast<Eigen::Index>(geometry_.element_count);
    const auto n_count = static_cast<Eigen::Index>(geometry_.mode_count);
    grid_size_ = envelope_grid_size(geometry_.mode_count);
    const auto t_count = static_cast<Eigen::Index>(grid_size_);

    spatial_.resize(m_count, n_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
        for (Eigen::Index n = 0; n < n_count; ++n) {
            spatial_(m, n) = geometry_.spatial_sine(static_cast<std::size_t>(n) + 1,
                                                    static_cast<std::size_t>(m));
        }
    }
    time_grid_.resize(n_count, t_count);
    for (Eigen::Index n = 0; n < n_count; ++n) {
        for (Eigen::Index j = 0; j < t_count; ++j) {
            time_grid_(n, j) = std::sin(static_cast<double>(n + 1) * kTwoPi *
                                        static_cast<double>(j) / static_cast<double>(t_count));
        }
    }
    scaled_.resize(m_count, n_count);
    values_.resize(m_count, t_count);
}

BiasVoltages EnvelopeSampler::sample(const ModeWeights& weights) {
    if (weights.amplitude.size() != geometry_.mode_count) {
        throw std::invalid_argument("envelope sampler: weight count does not match geometry");
    }
    const auto m_count = static_cast<Eigen::Index>(geometry_.element_count);
    const auto n_count = static_cast<Eigen::Index>(geometry_.mode_count);

    Eigen::Index active = 0;
    Eigen::Index active_idx = 0;
    for (Eigen::Index n = 0; n < n_count; ++n) {
        if (weights.amplitude[static_cast<std::size_t>(n)] != 0.0) {
            ++active;
            active_idx = n;
        }
    }

    BiasVoltages out;
    out.v.assign(static_cast<std::size_t>(m_count), weights.dc);
    if (active == 0) {
        return out;
    }
    if (active == 1) {
        // min over t of A sin(n w t) is exactly -|A|
        const double w = weights.amplitude[static_cast<std::size_t>(active_idx)];
        for (Eigen::Index m = 0; m < m_count; ++m) {
            out.v[static_cast<std::size_t>(m)] -= std::abs(w * spatial_(m, active_idx));
        }
        return out;
    }

    for (Eigen::Index n = 0; n < n_count; ++n) {
        scaled_.col(n) = spatial_.col(n) * weights.amplitude[static_cast<std::size_t>(n)];
    }
    values_.noalias() = scaled_ * time_grid_;

    const auto t_count = static_cast<Eigen::Index>(grid_size_);
    const double step = kTwoPi / static_cast<double>(t_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
        double grid_min = values_(m, 0);
        for (Eigen::Index j = 1; j < t_count; ++j) {
            grid_min = std::min(grid_min, values_(m, j));
        }
        // second-order bound on how far below its best sample a basin's
        // minimum can sit: |f''| <= sum n^2 |A_n|
        double curvature = 0.0;
        for (Eigen::Index n = 0; n < n_count; ++n) {
            curvature += static_cast<double>((n + 1) * (n + 1)) * std::abs(scaled_(m, n));
        }
        const double margin = 0.125 * curvature * step * step + 1e-15;

        double best = grid_min;
        for (Eigen::Index j = 0; j < t_count; ++j) {
            const double fj = values_(m, j);
            if (fj > grid_min + margin) {
                continue;
            }
            const double fprev = values_(m, (j + t_count - 1) % t_count);
            const double fnext = values_(m, (j + 1) % t_count);
            if (fj > fprev || fj > fnext) {
                continue;
            }
            const double u = step * static_cast<double>(j);
            best = std::min(best, golden_min(scaled_.row(m).transpose(), u - step, u + step));
        }
        out.v[static_cast<std::size_t>(m)] += best;
    }
    return out;
}

HoldSampler::HoldSampler(const BiasLineGeometry& geometry, double sample_time_s)
    : geometry_(geometry), sample_time_(sample_time_s) {
    geometry_.validate();
    check_sample_time(geometry_, sample_time_s);
    const auto m_count = static_cast<Eigen::Index>(geometry_.element_count);
    const auto n_count = static_cast<Eigen::Index>(geometry_.mode_count);
    const double wt = geometry_.omega_b() * sample_time_s;
    features_.resize(m_count, n_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
        for (Eigen::Index n = 0; n < n_count; ++n) {
            features_(m, n) = geometry_.spatial_sine(static_cast<std::size_t>(n) + 1,
                                                     static_cast<std::size_t>(m)) *
                              std::sin(static_cast<double>(n + 1) * wt);
        }
    }
}

Eigen::VectorXd HoldSampler::feature(std::size_t element) const {
    return features_.row(static_cast<Eigen::Index>(element)).transpose();
}

BiasVoltages HoldSampler::sample(const ModeWeights& weights) const {
    if (weights.amplitude.size() != geometry_.mode_count) {
        throw std::invalid_argument("hold sampler: weight count does not match geometry");
    }
    const Eigen::Map<const Eigen::VectorXd> w(weights.amplitude.data(),
                                              static_cast<Eigen::Index>(weights.amplitude.size()));
    Eigen::VectorXd v = features_ * w;
    BiasVoltages out;
    out.v.resize(static_cast<std::size_t>(v.size()));
    for (Eigen::Index m = 0; m < v.size(); ++m) {
        out.v[static_cast<std::size_t>(m)] = weights.dc + v[m];
    }
    return out;
}

BiasSampler::BiasSampler(const BiasLineGeometry& geometry, const SamplerKind& kind)
    : impl_(std::holds_alternative<EnvelopeDetector>(kind)
                ? std::variant<HoldSampler, EnvelopeSampler>(EnvelopeSampler(geometry))
                : std::variant<HoldSampler, EnvelopeSampler>(
                      HoldSampler(geometry, std::get<SampleAndHold>(kind).sample_time))) {}

const BiasLineGeometry& BiasSampler::geometry() const {
    if (const auto* h = std::get_if<HoldSampler>(&impl_)) {
        return h->geometry();
    }
    return std::get<EnvelopeSampler>(impl_).geometry();
}

BiasVoltages BiasSampler::sample(const ModeWeights& weights) {
    if (auto* h = std::get_if<HoldSampler>(&impl_)) {
        return h->sample(weights);
    }
    return std::get<EnvelopeSampler>(impl_).sample(weights);
}

BiasVoltages sample_envelope(const BiasLineGeometry& geometry, const ModeWeights& weights) {
    return EnvelopeSampler(geometry).sample(weights);
}

BiasVoltages sample_hold(const BiasLineGeometry& geometry, const ModeWeights& weights,
                         double sample_time_s) {
    return HoldSampler(geometry, sample_time_s).sample(weights);
}

namespace {

double mode_index_real(std::size_t element_count, double spacing_wavelengths, double theta_rad,
                       bool alternate_span) {
    if (std::abs(theta_rad) >= kPi / 2.0) {
        throw std::domain_error("mode index: |theta| must be < pi/2");
    }
    const double span = alternate_span ? static_cast<double>(element_count - 1)
                                       : static_cast<double>(element_count + 1);
    return std::abs(2.0 * span * spacing_wavelengths * std::sin(theta_rad));
}

} // namespace

long mode_index_sh(std::size_t element_count, double spacing_wavelengths, double theta_rad,
                   bool alternate_span) {
    return std::lround(mode_index_real(element_count, spacing_wavelengths, theta_rad,
                                       alternate_span));
}

long mode_index_pd(std::size_t element_count, double spacing_wavelengths, double theta_rad,
                   bool alternate_span) {
    const long sh = mode_index_sh(element_count, spacing_wavelengths, theta_rad, alternate_span);
    if (sh == 0) {
        return 0; // broadside: no oscillating mode
    }
    return std::max(1l, std::lround(static_cast<double>(sh) / 2.0));
}

} // namespace waveris

#pragma once

#include <string>
#include <vector>

namespace waveris {

struct VaractorParams {
    double capacitance_farad = 0.0;
    double resistance_ohm = 0.0;
};

struct VaractorRow {
    double bias_volt = 0.0;
    double capacitance_farad = 0.0;
    double resistance_ohm = 0.0;
};

// Measured small-signal varactor data: bias voltage -> (C_v, R_v), plus the
// static package inductance. Rows must be strictly increasing in voltage and
// both C_v and R_v must be nondecreasing (the device behaves that way under
// reverse bias; the interpolation below relies on it for monotonicity).
class VaractorBiasTable {
  public:
    VaractorBiasTable(std::vector<VaractorRow> rows, double series_inductance_henry);

    // Skyworks SMV1231-040LF equivalent-circuit data, -15 V .. -4 V in 1 V steps.
    static VaractorBiasTable smv1231();

    const std::vector<VaractorRow>& rows() const { return rows_; }
    double series_inductance() const { return series_inductance_; }
    double min_bias() const { return rows_.front().bias_volt; }
    double max_bias() const { return rows_.back().bias_volt; }

    // Piecewise-linear interpolation between adjacent rows; exact at grid points.
    // Throws std::out_of_range for V outside [min_bias, max_bias].
    VaractorParams at(double bias_volt) const;

  private:
    std::vector<VaractorRow> rows_;
    double series_inductance_ = 0.0;
};

// Tabular text format: header "V_volts, Cv_pF, Rv_ohm" followed by one row per
// line, sorted ascending in V. The package inductance is not part of the file.
VaractorBiasTable load_varactor_table(const std::string& path,
                                      double series_inductance_henry = 0.45e-9);
void save_varactor_table(const VaractorBiasTable& table, const std::string& path);

} // namespace waveris

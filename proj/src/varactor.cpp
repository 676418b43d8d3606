#include "waveris/varactor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "waveris/io.hpp"

namespace waveris {

VaractorBiasTable::VaractorBiasTable(std::vector<VaractorRow> rows,
                                     double series_inductance_henry)
    : rows_(std::move(rows)), series_inductance_(series_inductance_henry) {
    if (rows_.size() < 2) {
        throw std::invalid_argument("varactor table needs at least two rows");
    }
    if (series_inductance_ <= 0.0) {
        throw std::invalid_argument("varactor series inductance must be positive");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].capacitance_farad <= 0.0 || rows_[i].resistance_ohm < 0.0) {
            throw std::invalid_argument("varactor table row has non-physical values");
        }
        if (i > 0) {
            if (rows_[i].bias_volt <= rows_[i - 1].bias_volt) {
                throw std::invalid_argument("varactor bias voltages must be strictly increasing");
            }
            if (rows_[i].capacitance_farad < rows_[i - 1].capacitance_farad ||
                rows_[i].resistance_ohm < rows_[i - 1].resistance_ohm) {
                throw std::invalid_argument(
                    "varactor capacitance and resistance must be nondecreasing in bias");
            }
        }
    }
}

VaractorBiasTable VaractorBiasTable::smv1231() {
    // (V, C_v pF, R_v ohm); package inductance 0.45 nH
    static const double data[][3] = {
        {-15.0, 0.460, 0.005}, {-14.0, 0.465, 0.007}, {-13.0, 0.471, 0.011},
        {-12.0, 0.478, 0.016}, {-11.0, 0.488, 0.024}, {-10.0, 0.501, 0.037},
        {-9.0, 0.519, 0.058},  {-8.0, 0.544, 0.091},  {-7.0, 0.578, 0.142},
        {-6.0, 0.626, 0.221},  {-5.0, 0.697, 0.340},  {-4.0, 0.802, 0.509},
    };
    std::vector<VaractorRow> rows;
    rows.reserve(std::size(data));
    for (const auto& d : data) {
        rows.push_back({d[0], d[1] * 1e-12, d[2]});
    }
    return VaractorBiasTable(std::move(rows), 0.45e-9);
}

VaractorParams VaractorBiasTable::at(double bias_volt) const {
    if (bias_volt < min_bias() || bias_volt > max_bias()) {
        std::ostringstream msg;
        msg << "varactor bias " << bias_volt << " V outside admissible interval ["
            << min_bias() << ", " << max_bias() << "] V";
        throw std::out_of_range(msg.str());
    }
    const auto it = std::upper_bound(
        rows_.begin(), rows_.end(), bias_volt,
        [](double v, const VaractorRow& r) { return v < r.bias_volt; });
    if (it == rows_.begin()) {
        return {rows_.front().capacitance_farad, rows_.front().resistance_ohm};
    }
    if (it == rows_.end()) {
        return {rows_.back().capacitance_farad, rows_.back().resistance_ohm};
    }
    const VaractorRow& hi = *it;
    const VaractorRow& lo = *(it - 1);
    const double t = (bias_volt - lo.bias_volt) / (hi.bias_volt - lo.bias_volt);
    return {lo.capacitance_farad + t * (hi.capacitance_farad - lo.capacitance_farad),
            lo.resistance_ohm + t * (hi.resistance_ohm - lo.resistance_ohm)};
}

VaractorBiasTable load_varactor_table(const std::string& path,
                                      double series_inductance_henry) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open varactor table: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("varactor table is empty: " + path);
    }
    if (line != "V_volts, Cv_pF, Rv_ohm") {
        throw std::runtime_error("varactor table must start with header 'V_volts, Cv_pF, Rv_ohm'");
    }
    std::vector<VaractorRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double v = 0.0, c_pf = 0.0, r = 0.0;
        if (!(ss >> v >> c_pf >> r)) {
            throw std::runtime_error("varactor table: bad row at line " + std::to_string(lineno));
        }
        rows.push_back({v, c_pf * 1e-12, r});
    }
    return VaractorBiasTable(std::move(rows), series_inductance_henry);
}

void save_varactor_table(const VaractorBiasTable& table, const std::string& path) {
    std::string text = "V_volts, Cv_pF, Rv_ohm\n";
    for (const auto& r : table.rows()) {
        text += format_double(r.bias_volt);
        text += ", ";
        text += format_double(r.capacitance_farad * 1e12);
        text += ", ";
        text += format_double(r.resistance_ohm);
        text += "\n";
    }
    atomic_write_file(path, text);
}

} // namespace waveris

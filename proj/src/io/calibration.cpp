#include "magshape/io/calibration.hpp"

#include <fstream>
#include <json.hpp>
#include <numbers>

#include "magshape/core/error.hpp"
#include "magshape/core/strings.hpp"

namespace magshape::io {

SensorGeometry load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open calibration file: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw_data("calibration file is not a JSON object: " + path.string());

    SensorGeometry geom = SensorGeometry::standard();
    if (j.contains("r_mm")) geom.core_radius_mm = j.at("r_mm").get<double>();
    if (j.contains("S_eps")) geom.strain_sensitivity = j.at("S_eps").get<double>();
    if (j.contains("S_T")) geom.temp_sensitivity_per_k = j.at("S_T").get<double>();
    if (j.contains("core_angles_deg")) {
        geom.core_angles_rad.clear();
        for (const auto& d : j.at("core_angles_deg"))
            geom.core_angles_rad.push_back(d.get<double>() * std::numbers::pi / 180.0);
    }
    if (j.contains("lambda_B0_nm")) {
        const auto& rows = j.at("lambda_B0_nm");
        geom.base_wavelengths_nm.resize(static_cast<Eigen::Index>(rows.size()), geom.n_cores());
        for (size_t g = 0; g < rows.size(); ++g) {
            if (static_cast<int>(rows[g].size()) != geom.n_cores())
                throw_data("calibration: lambda_B0_nm rows must have one entry per core");
            for (int c = 0; c < geom.n_cores(); ++c)
                geom.base_wavelengths_nm(static_cast<Eigen::Index>(g), c) = rows[g][static_cast<size_t>(c)].get<double>();
        }
        geom.n_gratings = static_cast<int>(rows.size());
        geom.sensing_length_mm = (geom.n_gratings - 1) * geom.grating_spacing_mm;
    }
    geom.validate();
    return geom;
}

void save_calibration(const SensorGeometry& geom, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write calibration file: " + path.string());
    out << "{\"r_mm\":" << fmt_double(geom.core_radius_mm) << ",\"core_angles_deg\":[";
    for (size_t i = 0; i < geom.core_angles_rad.size(); ++i) {
        if (i) out << ',';
        out << fmt_double(geom.core_angles_rad[i] * 180.0 / std::numbers::pi);
    }
    out << "],\"S_eps\":" << fmt_double(geom.strain_sensitivity)
        << ",\"S_T\":" << fmt_double(geom.temp_sensitivity_per_k) << ",\"lambda_B0_nm\":[";
    for (Eigen::Index g = 0; g < geom.base_wavelengths_nm.rows(); ++g) {
        if (g) out << ',';
        out << '[';
        for (Eigen::Index c = 0; c < geom.base_wavelengths_nm.cols(); ++c) {
            if (c) out << ',';
            out << fmt_double(geom.base_wavelengths_nm(g, c));
        }
        out << ']';
    }
    out << "]}";
}

}  // namespace magshape::io

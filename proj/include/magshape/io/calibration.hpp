#pragma once

#include <filesystem>

#include "magshape/sensor_model.hpp"

namespace magshape::io {

// Calibration JSON:
//   {"r_mm": ..., "core_angles_deg": [...], "S_eps": ..., "S_T": ...,
//    "lambda_B0_nm": [[4 numbers] x 26]}
// Fields may be omitted; missing ones keep the standard-geometry defaults.
SensorGeometry load_calibration(const std::filesystem::path& path);

void save_calibration(const SensorGeometry& geom, const std::filesystem::path& path);

}  // namespace magshape::io

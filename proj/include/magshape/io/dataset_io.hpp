#pragma once

#include <filesystem>
#include <iosfwd>

#include "magshape/bezier.hpp"
#include "magshape/learn/dataset.hpp"
#include "magshape/shape_recon.hpp"

namespace magshape::io {

// Dataset CSV, full round-trip precision:
//   bx_mT,by_mT,bmag_mT,freq_Hz,dist_mm,p0x,...,p3z
void write_dataset_csv(const std::filesystem::path& path, const learn::Dataset& data);
learn::Dataset read_dataset_csv(const std::filesystem::path& path);

// Centerline CSV: idx,x_mm,y_mm,z_mm
void write_centerline_csv(std::ostream& out, const Centerline& c);

// Curve CSV row of the 12 control-point coordinates at 6 significant digits
// (human-facing export).
void write_curve_csv_header(std::ostream& out);
void write_curve_csv_row(std::ostream& out, const BezierCurve& curve);

// Per-frame reconstruction output, full precision (machine-facing; the batch
// and streaming paths must agree byte for byte):
//   frame,t_s,p0x,...,p3z,fit_rmse_mm
void write_recon_csv_header(std::ostream& out);
void write_recon_csv_row(std::ostream& out, size_t frame_index, double t_s, const BezierCurve& curve,
                         double fit_rmse_mm);

// Prediction CSV: p0x..p3z, full precision.
void write_prediction_csv(const std::filesystem::path& path, const Eigen::MatrixXd& predictions);
Eigen::MatrixXd read_prediction_csv(const std::filesystem::path& path);

std::vector<Eigen::Vector3d> read_centerline_csv(const std::filesystem::path& path);

}  // namespace magshape::io

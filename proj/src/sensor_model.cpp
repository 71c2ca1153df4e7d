#include "magshape/sensor_model.hpp"

#include <cmath>
#include <numbers>

#include "magshape/core/error.hpp"

namespace magshape {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMicro = 1e-6;
}  // namespace

double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);  // (-pi, pi] up to the -pi edge
    if (a <= -std::numbers::pi) a = std::numbers::pi;
    return a;
}

void SensorGeometry::validate() const {
    if (n_gratings < 2) throw_data("geometry: need at least 2 gratings");
    if (grating_spacing_mm <= 0 || sensing_length_mm <= 0)
        throw_data("geometry: spacing and sensing length must be positive");
    // n gratings span (n-1) uniform segments
    double span = (n_gratings - 1) * grating_spacing_mm;
    if (std::abs(span - sensing_length_mm) > 1e-9)
        throw_data("geometry: (n_gratings-1) * spacing must equal the sensing length");
    if (n_outer_cores() < 2) throw_data("geometry: need at least 2 outer cores");
    if (core_radius_mm <= 0) throw_data("geometry: outer-core radius must be positive");
    for (size_t i = 0; i < core_angles_rad.size(); ++i) {
        for (size_t j = i + 1; j < core_angles_rad.size(); ++j) {
            double d = std::remainder(core_angles_rad[i] - core_angles_rad[j], kTwoPi);
            if (std::abs(d) < 1e-9) throw_data("geometry: outer-core angles must be distinct mod 2pi");
        }
    }
    if (base_wavelengths_nm.rows() != n_gratings || base_wavelengths_nm.cols() != n_cores())
        throw_data("geometry: base wavelength matrix must be n_gratings x n_cores");
    if ((base_wavelengths_nm.array() <= 0.0).any())
        throw_data("geometry: base wavelengths must be positive (calibration error)");
}

SensorGeometry SensorGeometry::standard() {
    SensorGeometry g;
    g.core_angles_rad = {0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0};
    g.base_wavelengths_nm = Eigen::MatrixXd::Constant(g.n_gratings, g.n_cores(), 1550.0);
    return g;
}

void FbgFrame::validate(const SensorGeometry& geom) const {
    if (values.rows() != geom.n_gratings || values.cols() != geom.n_cores())
        throw_data("frame: value matrix must be n_gratings x n_cores");
    if (!values.allFinite()) throw_data("frame: non-finite values rejected at ingest");
}

Eigen::MatrixXd compensated_strain(const FbgFrame& frame, const SensorGeometry& geom) {
    geom.validate();
    frame.validate(geom);
    const int n_outer = geom.n_outer_cores();
    Eigen::MatrixXd out(geom.n_gratings, n_outer);

    if (frame.mode == FrameMode::WavelengthShift) {
        if (geom.strain_sensitivity == 0.0) throw_data("calibration: strain sensitivity is zero");
        // normalized shift of each core minus the central core's; the common
        // temperature term cancels
        for (int g = 0; g < geom.n_gratings; ++g) {
            double central = frame.values(g, 0) / (geom.strain_sensitivity * geom.base_wavelengths_nm(g, 0));
            for (int i = 0; i < n_outer; ++i) {
                double outer =
                    frame.values(g, i + 1) / (geom.strain_sensitivity * geom.base_wavelengths_nm(g, i + 1));
                out(g, i) = outer - central;
            }
        }
    } else {
        // interrogator already reports axial strain (microstrain); reference
        // the bending-insensitive central core
        for (int g = 0; g < geom.n_gratings; ++g) {
            double central = frame.values(g, 0);
            for (int i = 0; i < n_outer; ++i) out(g, i) = (frame.values(g, i + 1) - central) * kMicro;
        }
    }
    return out;
}

std::vector<double> strain_from_curvature(double kappa_per_mm, double theta_b_rad,
                                          const SensorGeometry& geom) {
    if (kappa_per_mm < 0) throw_data("strain_from_curvature: curvature must be non-negative");
    std::vector<double> eps(geom.core_angles_rad.size());
    constexpr double kPhase = 3.0 * std::numbers::pi / 2.0;
    for (size_t i = 0; i < eps.size(); ++i)
        eps[i] = -kappa_per_mm * geom.core_radius_mm *
                 std::sin(theta_b_rad - kPhase - geom.core_angles_rad[i]);
    return eps;
}

CurvatureProfile curvature_from_strain(const Eigen::MatrixXd& strains, const SensorGeometry& geom) {
    if (geom.core_radius_mm == 0.0) throw_data("geometry: outer-core radius is zero");
    if (strains.cols() != geom.n_outer_cores())
        throw_data("curvature_from_strain: one strain column per outer core expected");
    const int n_outer = geom.n_outer_cores();
    const int n = static_cast<int>(strains.rows());

    CurvatureProfile profile;
    profile.kappa_per_mm.resize(static_cast<size_t>(n));
    profile.theta_b_rad.resize(static_cast<size_t>(n));
    profile.straight.assign(static_cast<size_t>(n), 0);

    for (int g = 0; g < n; ++g) {
        double kx = 0.0, ky = 0.0;
        for (int i = 0; i < n_outer; ++i) {
            double s = strains(g, i) / geom.core_radius_mm;
            kx -= s * std::cos(geom.core_angles_rad[static_cast<size_t>(i)]);
            ky -= s * std::sin(geom.core_angles_rad[static_cast<size_t>(i)]);
        }
        double norm = std::hypot(kx, ky);
        profile.kappa_per_mm[static_cast<size_t>(g)] = 2.0 * norm / n_outer;
        if (norm == 0.0) {
            profile.theta_b_rad[static_cast<size_t>(g)] = 0.0;  // straight by convention
            profile.straight[static_cast<size_t>(g)] = 1;
        } else {
            profile.theta_b_rad[static_cast<size_t>(g)] = wrap_angle(std::atan2(ky, kx));
        }
    }
    return profile;
}

}  // namespace magshape

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace magshape {

// Multi-core fiber layout and calibration constants. One central core
// (radius 0) plus N outer cores at radius core_radius_mm; the outer-core
// angular positions must be distinct modulo 2pi.
struct SensorGeometry {
    int n_gratings = 26;
    double grating_spacing_mm = 10.0;
    double sensing_length_mm = 250.0;
    double core_radius_mm = 0.0375;
    std::vector<double> core_angles_rad;  // outer cores only
    double strain_sensitivity = 0.78;     // S_eps, dimensionless
    double temp_sensitivity_per_k = 6.67e-6;  // S_T; cancels out of the compensated strain
    Eigen::MatrixXd base_wavelengths_nm;  // [n_gratings x n_cores], column 0 = central core

    int n_outer_cores() const { return static_cast<int>(core_angles_rad.size()); }
    int n_cores() const { return 1 + n_outer_cores(); }
    int n_segments() const { return n_gratings - 1; }

    // throws Error(Data) when an invariant is violated
    void validate() const;

    // 26 gratings at 10 mm over 250 mm, cores at 0/120/240 deg, lambda0 = 1550 nm
    static SensorGeometry standard();
};

enum class FrameMode : uint8_t { WavelengthShift, Strain };

// One interrogator reading: wavelength shifts in nm, or axial strain in
// microstrain, for every grating x core.
struct FbgFrame {
    double timestamp_s = 0.0;
    FrameMode mode = FrameMode::Strain;
    Eigen::MatrixXd values;  // [n_gratings x n_cores], column 0 = central core

    // dimension + finiteness check against the geometry; throws Error(Data)
    void validate(const SensorGeometry& geom) const;
};

// Per-grating curvature magnitude and bending-plane angle.
struct CurvatureProfile {
    std::vector<double> kappa_per_mm;   // >= 0
    std::vector<double> theta_b_rad;    // in (-pi, pi]
    std::vector<uint8_t> straight;      // 1 where kappa_app vanished and theta_b is by-convention 0

    size_t size() const { return kappa_per_mm.size(); }
};

// Temperature-compensated strain per outer core: each outer core's
// normalized wavelength shift minus the central core's (strain mode:
// microstrain difference, rescaled to dimensionless strain).
// Returns [n_gratings x n_outer_cores].
Eigen::MatrixXd compensated_strain(const FbgFrame& frame, const SensorGeometry& geom);

// Forward model: bending strain seen by each outer core for a grating
// bending with curvature kappa in the plane at angle theta_b.
std::vector<double> strain_from_curvature(double kappa_per_mm, double theta_b_rad,
                                          const SensorGeometry& geom);

// Inverse model: apparent curvature vector from the outer-core strains, per
// grating. strains is [n_gratings x n_outer_cores], dimensionless.
CurvatureProfile curvature_from_strain(const Eigen::MatrixXd& strains, const SensorGeometry& geom);

// wrap into (-pi, pi]
double wrap_angle(double a);

}  // namespace magshape

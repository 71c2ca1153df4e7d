#pragma once

#include <Eigen/Dense>
#include <vector>

#include "magshape/sensor_model.hpp"

namespace magshape {

// Reconstructed 3D backbone: one point and one orthonormal frame per grating
// node, plus the exact arc length of every segment (arc lengths, not chord
// sums, so rescaling stays exact).
struct Centerline {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Matrix3d> frames;
    std::vector<double> seg_arc_lengths_mm;  // points.size() - 1 entries

    double arc_length_mm() const;
    Eigen::Vector3d tangent(size_t i) const { return frames[i].col(2); }
};

struct PccOptions {
    // below this the segment is treated as straight; the arc formulas and the
    // translation branch agree to machine precision at the boundary
    double straight_tol_per_mm = 1e-9;
    // segment k uses grating k (proximal node) by default; enable to average
    // gratings k and k+1 instead
    bool midpoint_average = false;
};

// Compose one circular-arc (or straight) transform per segment, starting at
// the origin with an identity frame, re-orthonormalizing the rotation by SVD
// after every step.
Centerline integrate_pcc(const CurvatureProfile& profile, const SensorGeometry& geom,
                         const PccOptions& opts = {});

// Uniform scaling about the base point so the arc length equals target;
// idempotent when the length already matches.
Centerline rescale_to_length(const Centerline& c, double target_length_mm);

// Keep the distal robot_length_mm of the backbone, re-expressed in the frame
// of the new base point (base at origin, base tangent +z).
Centerline trim_to_robot(const Centerline& c, double robot_length_mm);

// nearest rotation matrix in the Frobenius sense (SVD, det-corrected)
Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& m);

}  // namespace magshape

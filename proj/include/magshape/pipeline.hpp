#pragma once

#include <optional>

#include "magshape/bezier.hpp"
#include "magshape/sensor_model.hpp"
#include "magshape/shape_recon.hpp"

namespace magshape {

// Everything one frame needs to become a curve. Shared by the batch
// reconstruct command, the streaming client and the dataset generator, so
// all three produce identical numbers for identical input.
struct ReconstructOptions {
    SensorGeometry geometry = SensorGeometry::standard();
    double robot_length_mm = 40.0;
    PccOptions pcc;
    bool uniform_params = false;  // default: normalized chord-length parameters
};

struct FrameResult {
    Centerline fiber;   // full sensing length, rescaled
    Centerline robot;   // distal segment, re-based
    FitResult fit;
};

// compensated strain -> curvature profile -> PCC integration -> length
// rescale -> distal trim -> fixed-endpoint Bezier fit at the robot length
FrameResult reconstruct_frame(const FbgFrame& frame, const ReconstructOptions& opts);

}  // namespace magshape

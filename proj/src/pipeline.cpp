#include "magshape/pipeline.hpp"

namespace magshape {

FrameResult reconstruct_frame(const FbgFrame& frame, const ReconstructOptions& opts) {
    FrameResult out;
    Eigen::MatrixXd strains = compensated_strain(frame, opts.geometry);
    CurvatureProfile profile = curvature_from_strain(strains, opts.geometry);
    Centerline raw = integrate_pcc(profile, opts.geometry, opts.pcc);
    out.fiber = rescale_to_length(raw, opts.geometry.sensing_length_mm);
    out.robot = trim_to_robot(out.fiber, opts.robot_length_mm);

    std::vector<double> params = opts.uniform_params ? uniform_params(out.robot.points.size())
                                                     : chord_length_params(out.robot.points);
    out.fit = fit_fixed_endpoints(out.robot.points, params, out.robot.arc_length_mm());
    return out;
}

}  // namespace magshape

#include "magshape/shape_recon.hpp"

#include <cmath>

#include "magshape/core/error.hpp"

namespace magshape {

double Centerline::arc_length_mm() const {
    double total = 0.0;
    for (double s : seg_arc_lengths_mm) total += s;
    return total;
}

Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
    return u * v.transpose();
}

namespace {

Eigen::Matrix3d rot_z(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return r;
}

Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), 0.0, std::sin(a), 0.0, 1.0, 0.0, -std::sin(a), 0.0, std::cos(a);
    return r;
}

// circular mean, for the midpoint-averaging option
double mean_angle(double a, double b) {
    return std::atan2(std::sin(a) + std::sin(b), std::cos(a) + std::cos(b));
}

}  // namespace

Centerline integrate_pcc(const CurvatureProfile& profile, const SensorGeometry& geom,
                         const PccOptions& opts) {
    if (profile.size() != static_cast<size_t>(geom.n_gratings))
        throw_data("integrate_pcc: profile length must equal the grating count");

    const double ds = geom.grating_spacing_mm;
    const int n_seg = geom.n_segments();

    Centerline c;
    c.points.reserve(static_cast<size_t>(n_seg) + 1);
    c.frames.reserve(static_cast<size_t>(n_seg) + 1);
    c.seg_arc_lengths_mm.reserve(static_cast<size_t>(n_seg));

    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    c.points.push_back(p);
    c.frames.push_back(r);

    for (int k = 0; k < n_seg; ++k) {
        double kappa = profile.kappa_per_mm[static_cast<size_t>(k)];
        double theta_b = profile.theta_b_rad[static_cast<size_t>(k)];
        if (opts.midpoint_average) {
            kappa = 0.5 * (kappa + profile.kappa_per_mm[static_cast<size_t>(k) + 1]);
            theta_b = mean_angle(theta_b, profile.theta_b_rad[static_cast<size_t>(k) + 1]);
        }

        Eigen::Vector3d local_t;
        Eigen::Matrix3d local_r;
        if (kappa < opts.straight_tol_per_mm) {
            local_t = Eigen::Vector3d(0.0, 0.0, ds);
            local_r = Eigen::Matrix3d::Identity();
        } else {
            // arc of turn angle theta in the plane at theta_b; the
            // 2 sin^2(theta/2) form avoids 1-cos cancellation near the tol
            double theta = kappa * ds;
            double half = 0.5 * theta;
            double sagitta_x = 2.0 * std::sin(half) * std::sin(half) / kappa;
            double advance_z = std::sin(theta) / kappa;
            Eigen::Matrix3d plane = rot_z(theta_b);
            local_t = plane * Eigen::Vector3d(sagitta_x, 0.0, advance_z);
            local_r = plane * rot_y(theta) * rot_z(-theta_b);
        }

        p = p + r * local_t;
        r = orthonormalize_rotation(r * local_r);
        c.points.push_back(p);
        c.frames.push_back(r);
        c.seg_arc_lengths_mm.push_back(ds);
    }
    return c;
}

Centerline rescale_to_length(const Centerline& c, double target_length_mm) {
    double len = c.arc_length_mm();
    if (len <= 0.0) throw_data("rescale_to_length: degenerate zero-length centerline");
    if (target_length_mm <= 0.0) throw_data("rescale_to_length: target length must be positive");
    double scale = target_length_mm / len;

    Centerline out = c;
    const Eigen::Vector3d base = c.points.front();
    for (auto& pt : out.points) pt = base + scale * (pt - base);
    for (auto& s : out.seg_arc_lengths_mm) s *= scale;
    return out;
}

Centerline trim_to_robot(const Centerline& c, double robot_length_mm) {
    double total = c.arc_length_mm();
    if (robot_length_mm > total + 1e-9)
        throw_data("trim_to_robot: robot length exceeds the sensing length");
    if (robot_length_mm <= 0.0) throw_data("trim_to_robot: robot length must be positive");

    // walk segments from the tip until the requested arc length is covered
    size_t first = c.points.size() - 1;
    double acc = 0.0;
    while (first > 0 && acc < robot_length_mm - 1e-9) {
        --first;
        acc += c.seg_arc_lengths_mm[first];
    }
    if (std::abs(acc - robot_length_mm) > 1e-6)
        throw_data("trim_to_robot: robot length must align with grating nodes");

    const Eigen::Vector3d base = c.points[first];
    const Eigen::Matrix3d base_r = c.frames[first];

    Centerline out;
    out.points.reserve(c.points.size() - first);
    out.frames.reserve(c.points.size() - first);
    out.seg_arc_lengths_mm.reserve(c.points.size() - 1 - first);
    for (size_t i = first; i < c.points.size(); ++i) {
        out.points.push_back(base_r.transpose() * (c.points[i] - base));
        out.frames.push_back(base_r.transpose() * c.frames[i]);
        if (i > first) out.seg_arc_lengths_mm.push_back(c.seg_arc_lengths_mm[i - 1]);
    }
    return out;
}

}  // namespace magshape

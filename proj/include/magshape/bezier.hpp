#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <vector>

namespace magshape {

// Cubic Bezier in 3D. p0/p3 anchor the base and tip; p1/p2 shape the bend.
struct BezierCurve {
    Eigen::Vector3d p0, p1, p2, p3;

    // Bernstein combination; s must lie in [0, 1]
    Eigen::Vector3d evaluate(double s) const;
    Eigen::Vector3d derivative(double s) const;

    std::array<double, 12> flatten() const;
    static BezierCurve from_flat(const std::array<double, 12>& v);
    static BezierCurve from_row(const Eigen::RowVectorXd& v);  // 12 entries
};

struct FitResult {
    BezierCurve curve;
    double rmse_mm = 0.0;
    double max_err_mm = 0.0;
    double scale_applied = 1.0;
};

// normalized cumulative chord length of the points, first 0, last 1
std::vector<double> chord_length_params(std::span<const Eigen::Vector3d> pts);
std::vector<double> uniform_params(size_t n);

// Least-squares cubic fit with p0/p3 pinned to the first/last point: the
// endpoint Bernstein terms move to the right-hand side and the remaining
// two-column system is solved per axis through the SVD pseudoinverse. When
// target_length_mm is given, the fitted curve is then rescaled about p0 so
// its arc length matches (the constant-length constraint); rmse/max_err are
// reported for the delivered curve.
FitResult fit_fixed_endpoints(std::span<const Eigen::Vector3d> pts, std::span<const double> params,
                              std::optional<double> target_length_mm = std::nullopt);

// adaptive-subdivision quadrature of the speed, relative tolerance 1e-8
double arc_length(const BezierCurve& curve);

struct ShapeErrorStats {
    double mae_mm = 0.0;
    double p95_mm = 0.0;
    double max_mm = 0.0;
};

// Euclidean distance between the two curves at n common uniform parameter
// values: mean, 95th percentile (linear interpolation between order
// statistics) and max.
ShapeErrorStats shape_error(const BezierCurve& a, const BezierCurve& b, int n_samples);

// Percentile by linear interpolation between order statistics (values are
// copied and sorted internally); p in [0, 1].
double percentile_linear(std::vector<double> values, double p);

// Helper for synthetic fixtures: places p1/p2 a fraction lambda of the
// base-to-tip chord along the given unit end tangents. Smaller lambda gives a
// tighter bend. Not part of the fitting path.
BezierCurve curve_from_end_tangents(const Eigen::Vector3d& p0, const Eigen::Vector3d& t0,
                                    const Eigen::Vector3d& p3, const Eigen::Vector3d& t3,
                                    double lambda);

}  // namespace magshape

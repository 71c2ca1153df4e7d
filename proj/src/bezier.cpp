#include "magshape/bezier.hpp"

#include <algorithm>
#include <cmath>

#include "magshape/core/error.hpp"

namespace magshape {

Eigen::Vector3d BezierCurve::evaluate(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw_data("bezier: parameter outside [0, 1]");
    const double u = 1.0 - s;
    return u * u * u * p0 + 3.0 * s * u * u * p1 + 3.0 * s * s * u * p2 + s * s * s * p3;
}

Eigen::Vector3d BezierCurve::derivative(double s) const {
    const double u = 1.0 - s;
    return 3.0 * u * u * (p1 - p0) + 6.0 * u * s * (p2 - p1) + 3.0 * s * s * (p3 - p2);
}

std::array<double, 12> BezierCurve::flatten() const {
    return {p0.x(), p0.y(), p0.z(), p1.x(), p1.y(), p1.z(),
            p2.x(), p2.y(), p2.z(), p3.x(), p3.y(), p3.z()};
}

BezierCurve BezierCurve::from_flat(const std::array<double, 12>& v) {
    return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}, {v[9], v[10], v[11]}};
}

BezierCurve BezierCurve::from_row(const Eigen::RowVectorXd& v) {
    if (v.size() != 12) throw_data("bezier: control-point row must have 12 entries");
    return {{v(0), v(1), v(2)}, {v(3), v(4), v(5)}, {v(6), v(7), v(8)}, {v(9), v(10), v(11)}};
}

std::vector<double> chord_length_params(std::span<const Eigen::Vector3d> pts) {
    if (pts.size() < 2) throw_data("chord_length_params: need at least 2 points");
    std::vector<double> s(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
    double total = s.back();
    if (total <= 0.0) throw_data("chord_length_params: coincident points");
    for (auto& v : s) v /= total;
    s.back() = 1.0;
    return s;
}

std::vector<double> uniform_params(size_t n) {
    if (n < 2) throw_data("uniform_params: need at least 2 points");
    std::vector<double> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return s;
}

FitResult fit_fixed_endpoints(std::span<const Eigen::Vector3d> pts, std::span<const double> params,
                              std::optional<double> target_length_mm) {
    if (pts.size() < 4) throw_data("fit: need at least 4 points");
    if (params.size() != pts.size()) throw_data("fit: one parameter per point expected");
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i] < 0.0 || params[i] > 1.0) throw_data("fit: parameters must lie in [0, 1]");
        if (i > 0 && !(params[i] > params[i - 1]))
            throw_data("fit: parameters must be strictly increasing");
    }

    const Eigen::Vector3d p0 = pts.front();
    const Eigen::Vector3d p3 = pts.back();
    const auto n = static_cast<Eigen::Index>(pts.size());

    Eigen::MatrixXd basis(n, 2);
    Eigen::MatrixXd rhs(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = params[static_cast<size_t>(i)];
        const double u = 1.0 - s;
        basis(i, 0) = 3.0 * s * u * u;
        basis(i, 1) = 3.0 * s * s * u;
        rhs.row(i) = (pts[static_cast<size_t>(i)] - u * u * u * p0 - s * s * s * p3).transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(1) < 1e-12 * sv(0))
        throw_numeric("fit: rank-deficient system (interior basis vanishes at the given parameters)");
    Eigen::MatrixXd interior = svd.solve(rhs);  // 2 x 3, rows = p1, p2

    FitResult result;
    result.curve = {p0, interior.row(0).transpose(), interior.row(1).transpose(), p3};

    if (target_length_mm) {
        double len = arc_length(result.curve);
        if (len <= 0.0) throw_numeric("fit: cannot rescale a zero-length curve");
        double scale = *target_length_mm / len;
        result.scale_applied = scale;
        result.curve.p1 = p0 + scale * (result.curve.p1 - p0);
        result.curve.p2 = p0 + scale * (result.curve.p2 - p0);
        result.curve.p3 = p0 + scale * (result.curve.p3 - p0);
    }

    double sse = 0.0;
    double max_err = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double d = (result.curve.evaluate(params[i]) - pts[i]).norm();
        sse += d * d;
        max_err = std::max(max_err, d);
    }
    result.rmse_mm = std::sqrt(sse / static_cast<double>(pts.size()));
    result.max_err_mm = max_err;
    return result;
}

namespace {

double speed(const BezierCurve& c, double s) { return c.derivative(s).norm(); }

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const BezierCurve& c, double a, double fa, double b, double fb, double fm,
                double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = speed(c, lm), frm = speed(c, rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(c, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(c, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double arc_length(const BezierCurve& curve) {
    double fa = speed(curve, 0.0), fb = speed(curve, 1.0), fm = speed(curve, 0.5);
    double whole = simpson(0.0, fa, 1.0, fb, fm);
    if (whole <= 0.0) return 0.0;  // degenerate: all control points coincide
    double tol = std::max(1e-8 * whole, 1e-14);
    return adaptive(curve, 0.0, fa, 1.0, fb, fm, whole, tol, 40);
}

double percentile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw_data("percentile: empty sample");
    if (p < 0.0 || p > 1.0) throw_data("percentile: p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ShapeErrorStats shape_error(const BezierCurve& a, const BezierCurve& b, int n_samples) {
    if (n_samples < 2) throw_data("shape_error: need at least 2 samples");
    std::vector<double> dist(static_cast<size_t>(n_samples));
    double sum = 0.0, max = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double s = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        double d = (a.evaluate(s) - b.evaluate(s)).norm();
        dist[static_cast<size_t>(i)] = d;
        sum += d;
        max = std::max(max, d);
    }
    ShapeErrorStats stats;
    stats.mae_mm = sum / static_cast<double>(n_samples);
    stats.p95_mm = percentile_linear(dist, 0.95);
    stats.max_mm = max;
    return stats;
}

BezierCurve curve_from_end_tangents(const Eigen::Vector3d& p0, const Eigen::Vector3d& t0,
                                    const Eigen::Vector3d& p3, const Eigen::Vector3d& t3,
                                    double lambda) {
    if (lambda <= 0.0) throw_data("curve_from_end_tangents: lambda must be positive");
    const double chord = (p3 - p0).norm();
    return {p0, p0 + lambda * chord * t0.normalized(), p3 - lambda * chord * t3.normalized(), p3};
}

}  // namespace magshape

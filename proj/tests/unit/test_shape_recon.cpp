#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"
#include "magshape/shape_recon.hpp"

using namespace magshape;

namespace {
constexpr double kPi = std::numbers::pi;

CurvatureProfile uniform_profile(int n, double kappa, double theta) {
    CurvatureProfile p;
    p.kappa_per_mm.assign(static_cast<size_t>(n), kappa);
    p.theta_b_rad.assign(static_cast<size_t>(n), theta);
    p.straight.assign(static_cast<size_t>(n), kappa == 0.0 ? 1 : 0);
    return p;
}

double frame_orthonormality_defect(const Centerline& c) {
    double worst = 0.0;
    for (const auto& r : c.frames)
        worst = std::max(worst, (r.transpose() * r - Eigen::Matrix3d::Identity()).norm());
    return worst;
}
}  // namespace

TEST_CASE("pcc: zero curvature yields a straight +z line") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.0, 0.0), g);
    REQUIRE(c.points.size() == 26);
    for (int k = 0; k < 26; ++k) {
        CHECK((c.points[static_cast<size_t>(k)] - Eigen::Vector3d(0, 0, 10.0 * k)).norm() < 1e-12);
    }
    CHECK(c.arc_length_mm() == doctest::Approx(250.0));
}

TEST_CASE("pcc: single segment arc matches the analytic endpoint") {
    auto g = SensorGeometry::standard();
    g.n_gratings = 2;
    g.sensing_length_mm = 10.0;
    g.base_wavelengths_nm = Eigen::MatrixXd::Constant(2, 4, 1550.0);

    const double kappa = 0.05, ds = 10.0;
    auto c = integrate_pcc(uniform_profile(2, kappa, 0.0), g);
    const double theta = kappa * ds, radius = 1.0 / kappa;
    Eigen::Vector3d expect(radius * (1.0 - std::cos(theta)), 0.0, radius * std::sin(theta));
    CHECK((c.points[1] - expect).norm() < 1e-9);
    // the four-decimal reference values
    CHECK(c.points[1].x() == doctest::Approx(2.4483).epsilon(5e-5));
    CHECK(c.points[1].y() == doctest::Approx(0.0));
    CHECK(c.points[1].z() == doctest::Approx(9.5885).epsilon(5e-5));
}

TEST_CASE("pcc: uniform quarter-turn bends the tip tangent by pi/2") {
    auto g = SensorGeometry::standard();
    const double kappa = (kPi / 2.0) / 250.0;
    auto c = integrate_pcc(uniform_profile(g.n_gratings, kappa, 0.0), g);
    double turn = std::acos(std::clamp(c.tangent(0).dot(c.tangent(25)), -1.0, 1.0));
    CHECK(std::abs(turn - kPi / 2.0) < 1e-9);
    CHECK(std::abs(c.tangent(0).dot(c.tangent(25))) < 1e-9);
}

TEST_CASE("pcc: every frame stays orthonormal") {
    auto g = SensorGeometry::standard();
    Rng rng(5);
    CurvatureProfile p;
    for (int i = 0; i < g.n_gratings; ++i) {
        p.kappa_per_mm.push_back(rng.uniform(0.0, 0.2));
        p.theta_b_rad.push_back(rng.uniform(-kPi, kPi));
        p.straight.push_back(0);
    }
    auto c = integrate_pcc(p, g);
    CHECK(frame_orthonormality_defect(c) < 1e-9);
}

TEST_CASE("pcc: constant bending plane keeps the shape planar") {
    auto g = SensorGeometry::standard();
    const double theta_b = 0.73;
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.08, theta_b), g);
    // plane through the origin spanned by z and the bend direction
    Eigen::Vector3d normal(-std::sin(theta_b), std::cos(theta_b), 0.0);
    double worst = 0.0;
    for (const auto& pt : c.points) worst = std::max(worst, std::abs(normal.dot(pt)));
    CHECK(worst < 1e-9);
}

TEST_CASE("pcc: continuous across the straight-segment tolerance") {
    // one grating's curvature nudged across the branch point: the tip may only
    // move O(tol), bounded by the lever arm tol * ds * remaining_length
    auto g = SensorGeometry::standard();
    PccOptions opts;
    const double tol = opts.straight_tol_per_mm;
    auto base = uniform_profile(g.n_gratings, 0.0, 0.0);
    auto below = base, above = base;
    below.kappa_per_mm[12] = tol * (1.0 - 1e-9);
    below.theta_b_rad[12] = 0.4;
    above.kappa_per_mm[12] = tol * (1.0 + 1e-9);
    above.theta_b_rad[12] = 0.4;
    auto cb = integrate_pcc(below, g, opts);
    auto ca = integrate_pcc(above, g, opts);
    CHECK((cb.points.back() - ca.points.back()).norm() < 2.0 * tol * 10.0 * 250.0);
}

TEST_CASE("pcc: per-frame continuity in curvature") {
    auto g = SensorGeometry::standard();
    const double delta = 1e-7;
    auto base = integrate_pcc(uniform_profile(g.n_gratings, 0.05, 0.0), g);
    auto prof = uniform_profile(g.n_gratings, 0.05, 0.0);
    prof.kappa_per_mm[12] += delta;
    auto bumped = integrate_pcc(prof, g);
    // O(delta) tip movement: bounded by delta * ds * remaining length
    CHECK((bumped.points.back() - base.points.back()).norm() < delta * 10.0 * 250.0);
}

TEST_CASE("pcc: size mismatch rejected") {
    auto g = SensorGeometry::standard();
    CHECK_THROWS_AS(integrate_pcc(uniform_profile(10, 0.0, 0.0), g), Error);
}

TEST_CASE("rescale: identity when length already matches") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.03, 1.0), g);
    auto r = rescale_to_length(c, 250.0);
    for (size_t i = 0; i < c.points.size(); ++i) CHECK((r.points[i] - c.points[i]).norm() < 1e-12);
    CHECK(r.arc_length_mm() == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("rescale: straight line to its own length is unchanged") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.0, 0.0), g);
    auto r = rescale_to_length(c, 250.0);
    CHECK((r.points.back() - Eigen::Vector3d(0, 0, 250)).norm() < 1e-12);
}

TEST_CASE("rescale: inverse-scaling round trip") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.06, -0.9), g);
    auto grown = rescale_to_length(c, c.arc_length_mm() * 1.02);
    auto back = rescale_to_length(grown, 250.0);
    double worst = 0.0;
    for (size_t i = 0; i < c.points.size(); ++i)
        worst = std::max(worst, (back.points[i] - c.points[i]).norm());
    CHECK(worst < 1e-9);
}

TEST_CASE("rescale: degenerate input rejected") {
    Centerline c;
    c.points = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
    c.frames = {Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity()};
    c.seg_arc_lengths_mm = {0.0};
    CHECK_THROWS_AS(rescale_to_length(c, 10.0), Error);
}

TEST_CASE("trim: straight fiber keeps the last five nodes") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.0, 0.0), g);
    auto t = trim_to_robot(c, 40.0);
    REQUIRE(t.points.size() == 5);
    for (int k = 0; k < 5; ++k)
        CHECK((t.points[static_cast<size_t>(k)] - Eigen::Vector3d(0, 0, 10.0 * k)).norm() < 1e-12);
    CHECK(t.arc_length_mm() == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("trim: full length is the identity apart from the frame change") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.04, 0.3), g);
    auto t = trim_to_robot(c, 250.0);
    REQUIRE(t.points.size() == c.points.size());
    // base frame is the identity, so re-basing changes nothing
    double worst = 0.0;
    for (size_t i = 0; i < c.points.size(); ++i)
        worst = std::max(worst, (t.points[i] - c.points[i]).norm());
    CHECK(worst < 1e-12);
}

TEST_CASE("trim: curved shape keeps exactly the robot arc length and re-bases") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.07, 2.0), g);
    auto t = trim_to_robot(c, 40.0);
    REQUIRE(t.points.size() == 5);
    CHECK(std::abs(t.arc_length_mm() - 40.0) < 1e-9);
    CHECK(t.points.front().norm() < 1e-12);
    CHECK((t.tangent(0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-9);
}

TEST_CASE("trim: length beyond the fiber rejected") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.0, 0.0), g);
    CHECK_THROWS_AS(trim_to_robot(c, 260.0), Error);
}

TEST_CASE("trim: length off the grating pitch rejected") {
    auto g = SensorGeometry::standard();
    auto c = integrate_pcc(uniform_profile(g.n_gratings, 0.0, 0.0), g);
    CHECK_THROWS_AS(trim_to_robot(c, 35.0), Error);
}

TEST_CASE("midpoint averaging option stays close to the proximal convention") {
    // on a smoothly varying profile the two segment conventions agree to
    // first order; on rough profiles they are legitimately different models
    auto g = SensorGeometry::standard();
    CurvatureProfile p;
    for (int i = 0; i < g.n_gratings; ++i) {
        p.kappa_per_mm.push_back(0.005 * (1.0 + 0.5 * std::sin(i / 4.0)));
        p.theta_b_rad.push_back(0.3 + 0.05 * i / 26.0);
        p.straight.push_back(0);
    }
    PccOptions mid;
    mid.midpoint_average = true;
    auto proximal = integrate_pcc(p, g);
    auto averaged = integrate_pcc(p, g, mid);
    double gap = (proximal.points.back() - averaged.points.back()).norm();
    CHECK(gap > 0.0);   // a different convention, not a no-op
    CHECK(gap < 1.0);   // but the same backbone to first order
    CHECK(averaged.arc_length_mm() == doctest::Approx(250.0));
}

TEST_CASE("orthonormalize_rotation repairs drift") {
    Eigen::Matrix3d r;
    r << 1.0, 1e-4, 0.0, -2e-4, 1.0, 1e-5, 0.0, 0.0, 1.0 + 1e-4;
    auto fixed = orthonormalize_rotation(r);
    CHECK((fixed.transpose() * fixed - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(fixed.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

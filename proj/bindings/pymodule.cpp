#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "magshape/bezier.hpp"
#include "magshape/core/error.hpp"
#include "magshape/eval_stats.hpp"
#include "magshape/field_synth.hpp"
#include "magshape/learn/dataset.hpp"
#include "magshape/learn/forest.hpp"
#include "magshape/learn/model_io.hpp"
#include "magshape/learn/net.hpp"
#include "magshape/pipeline.hpp"
#include "magshape/sensor_model.hpp"
#include "magshape/shape_recon.hpp"

namespace py = pybind11;
using namespace magshape;

namespace {

// vector<Vector3d> <-> (n, 3) arrays at the boundary
Eigen::MatrixXd points_to_matrix(const std::vector<Eigen::Vector3d>& pts) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
    for (size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return m;
}

std::vector<Eigen::Vector3d> matrix_to_points(const Eigen::MatrixXd& m) {
    if (m.cols() != 3) throw Error(ErrorKind::Data, "expected an (n, 3) point array");
    std::vector<Eigen::Vector3d> pts(static_cast<size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) pts[static_cast<size_t>(i)] = m.row(i).transpose();
    return pts;
}

CurvatureProfile profile_from_arrays(const std::vector<double>& kappa,
                                     const std::vector<double>& theta) {
    if (kappa.size() != theta.size())
        throw Error(ErrorKind::Data, "kappa and theta_b must have equal length");
    CurvatureProfile p;
    p.kappa_per_mm = kappa;
    p.theta_b_rad = theta;
    p.straight.assign(kappa.size(), 0);
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "FBG shape sensing, Bezier encoding and field-to-shape learning";

    py::register_exception<Error>(m, "MagshapeError");

    py::enum_<FrameMode>(m, "FrameMode")
        .value("WavelengthShift", FrameMode::WavelengthShift)
        .value("Strain", FrameMode::Strain);

    py::class_<SensorGeometry>(m, "SensorGeometry")
        .def(py::init(&SensorGeometry::standard))
        .def_static("standard", &SensorGeometry::standard)
        .def_readwrite("n_gratings", &SensorGeometry::n_gratings)
        .def_readwrite("grating_spacing_mm", &SensorGeometry::grating_spacing_mm)
        .def_readwrite("sensing_length_mm", &SensorGeometry::sensing_length_mm)
        .def_readwrite("core_radius_mm", &SensorGeometry::core_radius_mm)
        .def_readwrite("core_angles_rad", &SensorGeometry::core_angles_rad)
        .def_readwrite("strain_sensitivity", &SensorGeometry::strain_sensitivity)
        .def_readwrite("base_wavelengths_nm", &SensorGeometry::base_wavelengths_nm)
        .def("validate", &SensorGeometry::validate);

    py::class_<FbgFrame>(m, "FbgFrame")
        .def(py::init<>())
        .def_readwrite("timestamp_s", &FbgFrame::timestamp_s)
        .def_readwrite("mode", &FbgFrame::mode)
        .def_readwrite("values", &FbgFrame::values);

    m.def("strain_from_curvature", &strain_from_curvature, py::arg("kappa_per_mm"),
          py::arg("theta_b_rad"), py::arg("geometry"));
    m.def(
        "curvature_from_strain",
        [](const Eigen::MatrixXd& strains, const SensorGeometry& geom) {
            auto p = curvature_from_strain(strains, geom);
            return py::make_tuple(p.kappa_per_mm, p.theta_b_rad);
        },
        py::arg("strains"), py::arg("geometry"));
    m.def("compensated_strain", &compensated_strain, py::arg("frame"), py::arg("geometry"));

    m.def(
        "integrate_pcc",
        [](const std::vector<double>& kappa, const std::vector<double>& theta,
           const SensorGeometry& geom) {
            return points_to_matrix(integrate_pcc(profile_from_arrays(kappa, theta), geom).points);
        },
        py::arg("kappa_per_mm"), py::arg("theta_b_rad"), py::arg("geometry"),
        "PCC backbone points for per-grating curvature/plane angles, (n, 3) mm");

    py::class_<BezierCurve>(m, "BezierCurve")
        .def(py::init([](const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                         const Eigen::Vector3d& p2, const Eigen::Vector3d& p3) {
                 return BezierCurve{p0, p1, p2, p3};
             }),
             py::arg("p0"), py::arg("p1"), py::arg("p2"), py::arg("p3"))
        .def_readwrite("p0", &BezierCurve::p0)
        .def_readwrite("p1", &BezierCurve::p1)
        .def_readwrite("p2", &BezierCurve::p2)
        .def_readwrite("p3", &BezierCurve::p3)
        .def("evaluate", &BezierCurve::evaluate, py::arg("s"))
        .def("flatten", &BezierCurve::flatten);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("curve", &FitResult::curve)
        .def_readonly("rmse_mm", &FitResult::rmse_mm)
        .def_readonly("max_err_mm", &FitResult::max_err_mm)
        .def_readonly("scale_applied", &FitResult::scale_applied);

    m.def(
        "fit_fixed_endpoints",
        [](const Eigen::MatrixXd& pts, const std::vector<double>& params,
           std::optional<double> target_length) {
            return fit_fixed_endpoints(matrix_to_points(pts), params, target_length);
        },
        py::arg("points"), py::arg("params"), py::arg("target_length_mm") = std::nullopt);
    m.def(
        "chord_length_params",
        [](const Eigen::MatrixXd& pts) { return chord_length_params(matrix_to_points(pts)); },
        py::arg("points"));
    m.def("arc_length", &arc_length, py::arg("curve"));
    m.def(
        "shape_error",
        [](const BezierCurve& a, const BezierCurve& b, int n) {
            auto e = shape_error(a, b, n);
            return py::make_tuple(e.mae_mm, e.p95_mm, e.max_mm);
        },
        py::arg("a"), py::arg("b"), py::arg("n_samples") = 100,
        "(mae_mm, p95_mm, max_mm) over common uniform parameters");

    m.def(
        "field_at",
        [](double amplitude, double frequency, double t) {
            return field_at(amplitude, frequency, t).b_mT;
        },
        py::arg("amplitude_mT"), py::arg("frequency_hz"), py::arg("time_s"));

    m.def(
        "reconstruct_frame",
        [](const FbgFrame& frame, double robot_length_mm) {
            ReconstructOptions opts;
            opts.robot_length_mm = robot_length_mm;
            FrameResult res = reconstruct_frame(frame, opts);
            return py::make_tuple(points_to_matrix(res.robot.points), res.fit.curve,
                                  res.fit.rmse_mm);
        },
        py::arg("frame"), py::arg("robot_length_mm") = 40.0,
        "(robot_points, curve, fit_rmse_mm) for one frame with the standard geometry");

    // learning
    py::class_<learn::ForestModel>(m, "ForestModel")
        .def("predict",
             [](const learn::ForestModel& model, const Eigen::MatrixXd& x) { return model.predict(x); })
        .def_readonly("n_features", &learn::ForestModel::n_features)
        .def_readonly("n_outputs", &learn::ForestModel::n_outputs);

    m.def(
        "train_forest",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int trees, int min_leaf, int mtry,
           uint64_t seed) {
            learn::Dataset d;
            d.features = x;
            d.targets = y;
            d.split.assign(static_cast<size_t>(x.rows()), learn::Split::Train);
            if (x.cols() != learn::Dataset::kNumFeatures || y.cols() != learn::Dataset::kNumTargets)
                throw Error(ErrorKind::Data, "expected 5 feature and 12 target columns");
            return learn::train_forest(d, {trees, min_leaf, mtry}, seed);
        },
        py::arg("features"), py::arg("targets"), py::arg("trees") = 200, py::arg("min_leaf") = 5,
        py::arg("mtry") = 2, py::arg("seed") = 0);
    m.def("save_forest", &learn::save_forest, py::arg("model"), py::arg("path"));
    m.def("load_forest", &learn::load_forest, py::arg("path"));

    // evaluation statistics
    m.def(
        "compute_metrics",
        [](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
            auto t = stats::compute_metrics(pred, truth);
            py::dict out;
            out["overall_rmse"] = t.overall_rmse;
            out["overall_r2"] = t.overall_r2_defined ? py::object(py::float_(t.overall_r2))
                                                     : py::object(py::none());
            out["overall_max"] = t.overall_max;
            py::list rmse, r2, max_err;
            for (const auto& o : t.per_output) {
                rmse.append(o.rmse);
                r2.append(o.r2_defined ? py::object(py::float_(o.r2)) : py::object(py::none()));
                max_err.append(o.max_abs_err);
            }
            out["rmse"] = rmse;
            out["r2"] = r2;
            out["max_err"] = max_err;
            out["per_point_rmse"] = t.per_point_rmse;
            return out;
        },
        py::arg("pred"), py::arg("truth"));

    m.def(
        "welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto r = stats::welch_t_test(a, b);
            return py::make_tuple(r.t, r.df, r.p);
        },
        py::arg("a"), py::arg("b"), "(t, df, two-sided p)");
    m.def(
        "levene_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto r = stats::levene_test(a, b);
            return py::make_tuple(r.w, r.p);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "lilliefors_test",
        [](const std::vector<double>& sample, int n_mc, uint64_t seed) {
            auto r = stats::lilliefors_test(sample, n_mc, seed);
            return py::make_tuple(r.d, r.p);
        },
        py::arg("sample"), py::arg("n_mc") = 10000, py::arg("seed") = 0);
}

#include "magshape/io/dataset_io.hpp"

#include <fstream>
#include <ostream>
#include <string>

#include "magshape/core/error.hpp"
#include "magshape/core/strings.hpp"

namespace magshape::io {

namespace {

const char* kDatasetHeader =
    "bx_mT,by_mT,bmag_mT,freq_Hz,dist_mm,p0x,p0y,p0z,p1x,p1y,p1z,p2x,p2y,p2z,p3x,p3y,p3z";
const char* kPredictionHeader = "p0x,p0y,p0z,p1x,p1y,p1z,p2x,p2y,p2z,p3x,p3y,p3z";

Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path, const char* expected_header,
                                 Eigen::Index cols) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open CSV file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw_data("empty CSV file: " + path.string());
    if (trim(line) != expected_header) throw_data("unexpected CSV header in " + path.string());

    std::vector<double> values;
    Eigen::Index rows = 0;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto fields = split(trimmed, ',');
        if (static_cast<Eigen::Index>(fields.size()) != cols)
            throw_data(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
        for (auto f : fields) {
            auto v = parse_double(trim(f));
            if (!v)
                throw_data(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
            values.push_back(*v);
        }
        ++rows;
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = values[static_cast<size_t>(r * cols + c)];
    return m;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const learn::Dataset& data) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write dataset CSV: " + path.string());
    out << kDatasetHeader << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
            if (c) out << ',';
            out << fmt_double(data.features(r, c));
        }
        for (Eigen::Index c = 0; c < data.targets.cols(); ++c)
            out << ',' << fmt_double(data.targets(r, c));
        out << '\n';
    }
    if (!out) throw_data("short write on dataset CSV: " + path.string());
}

learn::Dataset read_dataset_csv(const std::filesystem::path& path) {
    Eigen::MatrixXd m = read_numeric_csv(path, kDatasetHeader,
                                         learn::Dataset::kNumFeatures + learn::Dataset::kNumTargets);
    learn::Dataset data;
    data.features = m.leftCols(learn::Dataset::kNumFeatures);
    data.targets = m.rightCols(learn::Dataset::kNumTargets);
    data.split.assign(static_cast<size_t>(m.rows()), learn::Split::Train);
    data.validate();
    return data;
}

void write_centerline_csv(std::ostream& out, const Centerline& c) {
    out << "idx,x_mm,y_mm,z_mm\n";
    for (size_t i = 0; i < c.points.size(); ++i) {
        out << i << ',' << fmt_double(c.points[i].x()) << ',' << fmt_double(c.points[i].y()) << ','
            << fmt_double(c.points[i].z()) << '\n';
    }
}

void write_curve_csv_header(std::ostream& out) { out << kPredictionHeader << '\n'; }

void write_curve_csv_row(std::ostream& out, const BezierCurve& curve) {
    auto flat = curve.flatten();
    for (size_t i = 0; i < flat.size(); ++i) {
        if (i) out << ',';
        out << fmt_double_sig(flat[i], 6);
    }
    out << '\n';
}

void write_recon_csv_header(std::ostream& out) {
    out << "frame,t_s,p0x,p0y,p0z,p1x,p1y,p1z,p2x,p2y,p2z,p3x,p3y,p3z,fit_rmse_mm\n";
}

void write_recon_csv_row(std::ostream& out, size_t frame_index, double t_s, const BezierCurve& curve,
                         double fit_rmse_mm) {
    out << frame_index << ',' << fmt_double(t_s);
    for (double v : curve.flatten()) out << ',' << fmt_double(v);
    out << ',' << fmt_double(fit_rmse_mm) << '\n';
}

void write_prediction_csv(const std::filesystem::path& path, const Eigen::MatrixXd& predictions) {
    if (predictions.cols() != 12) throw_data("prediction CSV: expected 12 columns");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write prediction CSV: " + path.string());
    out << kPredictionHeader << '\n';
    for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
        for (Eigen::Index c = 0; c < predictions.cols(); ++c) {
            if (c) out << ',';
            out << fmt_double(predictions(r, c));
        }
        out << '\n';
    }
    if (!out) throw_data("short write on prediction CSV: " + path.string());
}

Eigen::MatrixXd read_prediction_csv(const std::filesystem::path& path) {
    return read_numeric_csv(path, kPredictionHeader, 12);
}

std::vector<Eigen::Vector3d> read_centerline_csv(const std::filesystem::path& path) {
    Eigen::MatrixXd m = read_numeric_csv(path, "idx,x_mm,y_mm,z_mm", 4);
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(static_cast<size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) pts.emplace_back(m(r, 1), m(r, 2), m(r, 3));
    return pts;
}

}  // namespace magshape::io

#include "magshape/field_synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "magshape/core/error.hpp"
#include "magshape/core/parallel.hpp"
#include "magshape/core/rng.hpp"
#include "magshape/io/frames.hpp"

namespace magshape {

FieldCommand field_at(double amplitude_mT, double frequency_hz, double time_s) {
    if (amplitude_mT < 0) throw_data("field_at: amplitude must be non-negative");
    if (frequency_hz <= 0) throw_data("field_at: frequency must be positive");
    FieldCommand cmd;
    cmd.amplitude_mT = amplitude_mT;
    cmd.frequency_hz = frequency_hz;
    cmd.time_s = time_s;
    const double phase = 2.0 * std::numbers::pi * frequency_hz * time_s;
    cmd.b_mT = amplitude_mT * Eigen::Vector3d(-std::sin(phase), std::cos(phase), 0.0);
    return cmd;
}

void SynthParams::validate() const {
    if (gain_per_mm_mT <= 0 || corner_freq_hz <= 0 || phase_lag_rad_per_hz <= 0 ||
        distance_exponent <= 0 || ref_distance_mm <= 0 || noise_ustrain < 0)
        throw_data("synth params: all parameters must be positive (noise may be zero)");
}

int ScenarioGrid::frames_per_scenario() const {
    return static_cast<int>(std::llround(duration_s * frame_rate_hz));
}

void ScenarioGrid::validate() const {
    if (amplitudes_mT.empty() || frequencies_hz.empty() || distances_mm.empty())
        throw_data("scenario grid: empty axis");
    for (double a : amplitudes_mT)
        if (a < 0 || a > 14) throw_data("scenario grid: amplitudes must lie in [0, 14] mT");
    for (double f : frequencies_hz)
        if (f < 0.2 || f > 1.0) throw_data("scenario grid: frequencies must lie in [0.2, 1.0] Hz");
    for (double d : distances_mm)
        if (d < 90 || d > 100) throw_data("scenario grid: distances must lie in [90, 100] mm");
    if (frame_rate_hz <= 0) throw_data("scenario grid: frame rate must be positive");
    if (duration_s < 0) throw_data("scenario grid: duration must be non-negative");
}

std::vector<Scenario> enumerate_scenarios(const ScenarioGrid& grid) {
    std::vector<Scenario> out;
    out.reserve(static_cast<size_t>(grid.n_scenarios()));
    int index = 0;
    for (double d : grid.distances_mm)
        for (double f : grid.frequencies_hz)
            for (double a : grid.amplitudes_mT) out.push_back({index++, a, f, d});
    return out;
}

CurvatureProfile synth_deformation(const FieldCommand& cmd, double d_tip_mm, const SynthParams& p,
                                   int robot_nodes) {
    if (d_tip_mm < 90.0 || d_tip_mm > 100.0) throw_data("synth: tip distance must lie in [90, 100] mm");
    p.validate();

    const double f = cmd.frequency_hz;
    const double atten = std::sqrt(1.0 + (f / p.corner_freq_hz) * (f / p.corner_freq_hz));
    const double falloff = std::pow(p.ref_distance_mm / d_tip_mm, p.distance_exponent);
    const double kappa = p.gain_per_mm_mT * cmd.amplitude_mT * falloff / atten;

    CurvatureProfile profile;
    profile.kappa_per_mm.assign(static_cast<size_t>(robot_nodes), kappa);
    profile.straight.assign(static_cast<size_t>(robot_nodes), kappa == 0.0 ? 1 : 0);
    double theta = 0.0;
    if (kappa > 0.0)
        theta = wrap_angle(std::atan2(cmd.b_mT.y(), cmd.b_mT.x()) - p.phase_lag_rad_per_hz * f);
    profile.theta_b_rad.assign(static_cast<size_t>(robot_nodes), theta);
    return profile;
}

FbgFrame synth_frame(const FieldCommand& cmd, double d_tip_mm, const SynthParams& p,
                     const ReconstructOptions& opts, FrameMode mode) {
    const SensorGeometry& geom = opts.geometry;
    const int robot_nodes =
        static_cast<int>(std::llround(opts.robot_length_mm / geom.grating_spacing_mm)) + 1;
    CurvatureProfile robot = synth_deformation(cmd, d_tip_mm, p, robot_nodes);

    FbgFrame frame;
    frame.timestamp_s = cmd.time_s;
    frame.mode = mode;
    frame.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());

    const int first_robot = geom.n_gratings - robot_nodes;
    for (int g = first_robot; g < geom.n_gratings; ++g) {
        auto eps = strain_from_curvature(robot.kappa_per_mm[static_cast<size_t>(g - first_robot)],
                                         robot.theta_b_rad[static_cast<size_t>(g - first_robot)], geom);
        for (int i = 0; i < geom.n_outer_cores(); ++i) {
            if (mode == FrameMode::Strain) {
                frame.values(g, i + 1) = eps[static_cast<size_t>(i)] * 1e6;  // microstrain
            } else {
                frame.values(g, i + 1) =
                    geom.strain_sensitivity * geom.base_wavelengths_nm(g, i + 1) * eps[static_cast<size_t>(i)];
            }
        }
    }
    return frame;
}

namespace {

// Strain-equivalent Gaussian noise on every core. In wavelength mode the
// noise is mapped through the same sensitivity the ingest divides by.
void add_noise(FbgFrame& frame, const SensorGeometry& geom, double noise_ustrain, Rng& rng) {
    if (noise_ustrain == 0.0) return;
    for (Eigen::Index g = 0; g < frame.values.rows(); ++g) {
        for (Eigen::Index c = 0; c < frame.values.cols(); ++c) {
            double n_ustrain = noise_ustrain * rng.normal();
            if (frame.mode == FrameMode::Strain) {
                frame.values(g, c) += n_ustrain;
            } else {
                frame.values(g, c) +=
                    geom.strain_sensitivity * geom.base_wavelengths_nm(g, c) * n_ustrain * 1e-6;
            }
        }
    }
}

std::string scenario_file_name(const Scenario& sc) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "frames_s%02d_A%04.1f_f%03.1f_d%05.1f.ndjson", sc.index,
                  sc.amplitude_mT, sc.frequency_hz, sc.distance_mm);
    return buf;
}

}  // namespace

GeneratedDataset generate_dataset(const ScenarioGrid& grid, const SynthParams& params,
                                  const ReconstructOptions& opts, FrameMode mode, uint64_t seed,
                                  const std::filesystem::path& out_dir) {
    grid.validate();
    params.validate();
    opts.geometry.validate();

    const auto scenarios = enumerate_scenarios(grid);
    const int frames_per = grid.frames_per_scenario();
    const auto n_rows = static_cast<Eigen::Index>(scenarios.size()) * frames_per;

    GeneratedDataset out;
    out.data.features.resize(n_rows, learn::Dataset::kNumFeatures);
    out.data.targets.resize(n_rows, learn::Dataset::kNumTargets);
    out.data.split.assign(static_cast<size_t>(n_rows), learn::Split::Train);
    out.scenarios.resize(scenarios.size());

    const bool write_files = !out_dir.empty();
    if (write_files) std::filesystem::create_directories(out_dir);

    parallel_for(scenarios.size(), [&](size_t si) {
        const Scenario& sc = scenarios[si];
        Rng rng(derive_seed(seed, "scenario", static_cast<uint64_t>(sc.index)));
        std::vector<FbgFrame> frames;
        frames.reserve(static_cast<size_t>(frames_per));

        for (int k = 0; k < frames_per; ++k) {
            const double t = static_cast<double>(k) / grid.frame_rate_hz;
            FieldCommand cmd = field_at(sc.amplitude_mT, sc.frequency_hz, t);
            FbgFrame frame = synth_frame(cmd, sc.distance_mm, params, opts, mode);
            add_noise(frame, opts.geometry, params.noise_ustrain, rng);

            FrameResult rec = reconstruct_frame(frame, opts);
            const auto row = static_cast<Eigen::Index>(si) * frames_per + k;
            out.data.features(row, 0) = cmd.b_mT.x();
            out.data.features(row, 1) = cmd.b_mT.y();
            out.data.features(row, 2) = cmd.amplitude_mT;
            out.data.features(row, 3) = cmd.frequency_hz;
            out.data.features(row, 4) = sc.distance_mm;
            auto flat = rec.fit.curve.flatten();
            for (int j = 0; j < 12; ++j) out.data.targets(row, j) = flat[static_cast<size_t>(j)];
            frames.push_back(std::move(frame));
        }

        GeneratedScenario& gs = out.scenarios[si];
        gs.scenario = sc;
        gs.n_frames = frames_per;
        gs.frame_file = scenario_file_name(sc);
        if (write_files) io::write_frames_file(out_dir / gs.frame_file, frames);
    });

    return out;
}

}  // namespace magshape

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "magshape/learn/dataset.hpp"
#include "magshape/pipeline.hpp"
#include "magshape/sensor_model.hpp"

namespace magshape {

// One tick of the rotating in-plane actuation field.
struct FieldCommand {
    double amplitude_mT = 0.0;
    double frequency_hz = 0.0;
    double time_s = 0.0;
    Eigen::Vector3d b_mT = Eigen::Vector3d::Zero();
};

// b(t) = A * (-sin(2 pi f t), cos(2 pi f t), 0)
FieldCommand field_at(double amplitude_mT, double frequency_hz, double time_s);

// Synthetic response of the soft segment. This is a deliberately simple
// stand-in for the real robot: uniform curvature over the embedded segment,
// first-order amplitude attenuation in frequency, dipole-like falloff with
// tip distance, and a frequency-proportional phase lag of the bending plane.
// Its purpose is to exercise the pipeline with a learnable ground truth, not
// to model silicone viscoelasticity.
struct SynthParams {
    double gain_per_mm_mT = 2.5e-4;      // curvature per mT at the reference distance, f -> 0
    double corner_freq_hz = 0.6;
    double phase_lag_rad_per_hz = 0.3;
    double distance_exponent = 3.0;
    double ref_distance_mm = 100.0;
    double noise_ustrain = 2.0;          // per-core Gaussian strain noise

    void validate() const;
};

// The actuation protocol: every amplitude x frequency x distance combination
// is one scenario, sampled at frame_rate for duration seconds.
struct ScenarioGrid {
    std::vector<double> amplitudes_mT = {2, 4, 6, 8, 10, 12, 14};
    std::vector<double> frequencies_hz = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> distances_mm = {100, 90};
    double frame_rate_hz = 30.0;
    double duration_s = 73.0 / 30.0;  // 73 frames/scenario -> 5110 rows over the 70 scenarios

    int n_scenarios() const {
        return static_cast<int>(amplitudes_mT.size() * frequencies_hz.size() * distances_mm.size());
    }
    int frames_per_scenario() const;
    void validate() const;
};

struct Scenario {
    int index = 0;
    double amplitude_mT = 0.0;
    double frequency_hz = 0.0;
    double distance_mm = 0.0;
};

std::vector<Scenario> enumerate_scenarios(const ScenarioGrid& grid);

// Uniform-curvature profile of the embedded segment (5 nodes for the 40 mm
// robot on a 10 mm grating pitch).
CurvatureProfile synth_deformation(const FieldCommand& cmd, double d_tip_mm, const SynthParams& p,
                                   int robot_nodes = 5);

// Noise-free synthetic frame for one tick: robot gratings carry the bending
// strain of synth_deformation, everything proximal stays straight.
FbgFrame synth_frame(const FieldCommand& cmd, double d_tip_mm, const SynthParams& p,
                     const ReconstructOptions& opts, FrameMode mode);

struct GeneratedScenario {
    Scenario scenario;
    std::string frame_file;  // file name within the output directory
    int n_frames = 0;
};

struct GeneratedDataset {
    learn::Dataset data;
    std::vector<GeneratedScenario> scenarios;
};

// Full synthetic acquisition: for every scenario tick, build the field,
// deform, add seeded strain noise, write the frame, and push the frame
// through the reconstruction pipeline to obtain the 12 targets. Deterministic
// given the seed; scenarios carry independent derived seeds so parallel and
// serial runs agree. Pass an empty out_dir to skip writing frame files.
GeneratedDataset generate_dataset(const ScenarioGrid& grid, const SynthParams& params,
                                  const ReconstructOptions& opts, FrameMode mode, uint64_t seed,
                                  const std::filesystem::path& out_dir);

}  // namespace magshape

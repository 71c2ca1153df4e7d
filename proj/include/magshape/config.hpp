#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "magshape/field_synth.hpp"
#include "magshape/learn/forest.hpp"
#include "magshape/learn/net.hpp"
#include "magshape/pipeline.hpp"

namespace magshape {

struct NetworkConfig {
    std::string address = "127.0.0.1";
    int port = 7071;
    double rate_hz = 30.0;
    int max_retries = 5;
};

struct LearnSettings {
    learn::ForestConfig forest;
    learn::NetConfig net;
    double train_ratio = 0.8;
    double test_ratio = 0.2;
    double val_fraction = 0.15;  // carved out of the training share for the net
};

// Every command is a pure function of (inputs, config, seed). The seed is
// mandatory: there is no wall-clock fallback.
struct Config {
    uint64_t seed = 0;
    bool seed_set = false;
    std::optional<std::filesystem::path> calibration;
    std::filesystem::path output_dir = ".";
    SynthParams synth;
    ScenarioGrid grid;
    FrameMode frame_mode = FrameMode::Strain;
    double robot_length_mm = 40.0;
    LearnSettings learn;
    NetworkConfig network;

    // geometry from the calibration file (or the standard one), robot length
    // and PCC options folded in
    ReconstructOptions reconstruct_options() const;

    uint64_t require_seed() const;

    static Config load(const std::filesystem::path& path);
};

}  // namespace magshape

#include "magshape/config.hpp"

#include <fstream>
#include <json.hpp>

#include "magshape/core/error.hpp"
#include "magshape/io/calibration.hpp"

namespace magshape {

namespace {

using nlohmann::json;

std::vector<double> doubles_or(const json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

}  // namespace

ReconstructOptions Config::reconstruct_options() const {
    ReconstructOptions opts;
    if (calibration) opts.geometry = io::load_calibration(*calibration);
    opts.robot_length_mm = robot_length_mm;
    return opts;
}

uint64_t Config::require_seed() const {
    if (!seed_set) throw_usage("a seed is required (config \"seed\" or --seed)");
    return seed;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_usage("cannot open config file: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw_usage("config file is not a JSON object: " + path.string());

    Config cfg;
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<uint64_t>();
        cfg.seed_set = true;
    }
    if (j.contains("calibration")) {
        cfg.calibration = std::filesystem::path(j.at("calibration").get<std::string>());
        if (!std::filesystem::exists(*cfg.calibration))
            throw_usage("config: calibration file does not exist: " + cfg.calibration->string());
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("robot_length_mm")) cfg.robot_length_mm = j.at("robot_length_mm").get<double>();
    if (j.contains("frame_mode")) {
        const std::string mode = j.at("frame_mode").get<std::string>();
        if (mode == "strain")
            cfg.frame_mode = FrameMode::Strain;
        else if (mode == "wl")
            cfg.frame_mode = FrameMode::WavelengthShift;
        else
            throw_usage("config: frame_mode must be \"strain\" or \"wl\"");
    }

    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        auto& p = cfg.synth;
        p.gain_per_mm_mT = s.value("gain_per_mm_mT", p.gain_per_mm_mT);
        p.corner_freq_hz = s.value("corner_freq_hz", p.corner_freq_hz);
        p.phase_lag_rad_per_hz = s.value("phase_lag_rad_per_hz", p.phase_lag_rad_per_hz);
        p.distance_exponent = s.value("distance_exponent", p.distance_exponent);
        p.ref_distance_mm = s.value("ref_distance_mm", p.ref_distance_mm);
        p.noise_ustrain = s.value("noise_ustrain", p.noise_ustrain);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        auto& grid = cfg.grid;
        grid.amplitudes_mT = doubles_or(g, "amplitudes_mT", grid.amplitudes_mT);
        grid.frequencies_hz = doubles_or(g, "frequencies_hz", grid.frequencies_hz);
        grid.distances_mm = doubles_or(g, "distances_mm", grid.distances_mm);
        grid.frame_rate_hz = g.value("frame_rate_hz", grid.frame_rate_hz);
        grid.duration_s = g.value("duration_s", grid.duration_s);
    }
    if (j.contains("learn")) {
        const auto& l = j.at("learn");
        auto& ls = cfg.learn;
        ls.forest.trees = l.value("trees", ls.forest.trees);
        ls.forest.min_leaf = l.value("min_leaf", ls.forest.min_leaf);
        ls.forest.mtry = l.value("mtry", ls.forest.mtry);
        ls.train_ratio = l.value("train_ratio", ls.train_ratio);
        ls.test_ratio = l.value("test_ratio", ls.test_ratio);
        ls.val_fraction = l.value("val_fraction", ls.val_fraction);
        if (l.contains("hidden")) {
            ls.net.hidden.clear();
            for (const auto& h : l.at("hidden")) ls.net.hidden.push_back(h.get<int>());
        }
        ls.net.mu0 = l.value("mu0", ls.net.mu0);
        ls.net.mu_up = l.value("mu_up", ls.net.mu_up);
        ls.net.mu_down = l.value("mu_down", ls.net.mu_down);
        ls.net.max_epochs = l.value("max_epochs", ls.net.max_epochs);
        ls.net.patience = l.value("patience", ls.net.patience);
    }
    if (j.contains("network")) {
        const auto& n = j.at("network");
        cfg.network.address = n.value("address", cfg.network.address);
        cfg.network.port = n.value("port", cfg.network.port);
        cfg.network.rate_hz = n.value("rate_hz", cfg.network.rate_hz);
        cfg.network.max_retries = n.value("max_retries", cfg.network.max_retries);
    }
    cfg.learn.net.target_scale_mm = cfg.robot_length_mm;
    return cfg;
}

}  // namespace magshape

#include "magshape/io/frames.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "magshape/core/error.hpp"
#include "magshape/core/strings.hpp"

namespace magshape::io {

std::string frame_to_line(const FbgFrame& frame) {
    std::string out;
    out.reserve(64 + static_cast<size_t>(frame.values.size()) * 20);
    out += "{\"t\":";
    out += fmt_double(frame.timestamp_s);
    out += ",\"mode\":\"";
    out += (frame.mode == FrameMode::Strain) ? "strain" : "wl";
    out += "\",\"v\":[";
    for (Eigen::Index g = 0; g < frame.values.rows(); ++g) {
        if (g) out += ',';
        out += '[';
        for (Eigen::Index c = 0; c < frame.values.cols(); ++c) {
            if (c) out += ',';
            out += fmt_double(frame.values(g, c));
        }
        out += ']';
    }
    out += "]}";
    return out;
}

std::optional<FbgFrame> parse_frame_line(std::string_view line, int n_gratings, int n_cores) {
    if (line.empty() || line.size() > kMaxFrameLineBytes) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;

    auto t_it = j.find("t");
    auto mode_it = j.find("mode");
    auto v_it = j.find("v");
    if (t_it == j.end() || mode_it == j.end() || v_it == j.end()) return std::nullopt;
    if (!t_it->is_number() || !mode_it->is_string() || !v_it->is_array()) return std::nullopt;

    FbgFrame frame;
    frame.timestamp_s = t_it->get<double>();
    const std::string mode = mode_it->get<std::string>();
    if (mode == "strain")
        frame.mode = FrameMode::Strain;
    else if (mode == "wl")
        frame.mode = FrameMode::WavelengthShift;
    else
        return std::nullopt;

    if (v_it->size() != static_cast<size_t>(n_gratings)) return std::nullopt;
    frame.values.resize(n_gratings, n_cores);
    for (int g = 0; g < n_gratings; ++g) {
        const auto& row = (*v_it)[static_cast<size_t>(g)];
        if (!row.is_array() || row.size() != static_cast<size_t>(n_cores)) return std::nullopt;
        for (int c = 0; c < n_cores; ++c) {
            const auto& cell = row[static_cast<size_t>(c)];
            if (!cell.is_number()) return std::nullopt;
            frame.values(g, c) = cell.get<double>();
        }
    }
    if (!std::isfinite(frame.timestamp_s)) return std::nullopt;
    return frame;
}

FrameReadStats read_frames_file(const std::filesystem::path& path, int n_gratings, int n_cores,
                                std::vector<FbgFrame>& out) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open frames file: " + path.string());
    FrameReadStats stats;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto frame = parse_frame_line(line, n_gratings, n_cores);
        if (!frame) {
            ++stats.malformed;
            continue;
        }
        if (!frame->values.allFinite()) {
            ++stats.non_finite;
            continue;
        }
        out.push_back(std::move(*frame));
        ++stats.ok;
    }
    return stats;
}

void write_frames_file(const std::filesystem::path& path, const std::vector<FbgFrame>& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write frames file: " + path.string());
    for (const auto& f : frames) {
        out << frame_to_line(f) << '\n';
    }
    if (!out) throw_data("short write on frames file: " + path.string());
}

}  // namespace magshape::io

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magshape/sensor_model.hpp"

namespace magshape::io {

// Wire format: one JSON object per line, newline terminated, UTF-8:
//   {"t": <seconds>, "mode": "strain"|"wl", "v": [[4 numbers] x 26]}
// Strain mode carries microstrain, wl mode carries wavelength shifts in nm.
// Lines longer than 64 KiB or failing to parse/validate are skipped by the
// consumer, never fatal.

constexpr size_t kMaxFrameLineBytes = 64 * 1024;

std::string frame_to_line(const FbgFrame& frame);

// nullopt on any malformed input (bad JSON, wrong arity, non-numeric,
// non-finite values, oversized line)
std::optional<FbgFrame> parse_frame_line(std::string_view line, int n_gratings = 26, int n_cores = 4);

struct FrameReadStats {
    size_t ok = 0;
    size_t malformed = 0;  // parse/shape failures
    size_t non_finite = 0; // parsed but carried NaN/Inf
};

// Read every line of a frames file; malformed entries are counted, valid
// frames appended. Throws Error(Data) if the file cannot be opened.
FrameReadStats read_frames_file(const std::filesystem::path& path, int n_gratings, int n_cores,
                                std::vector<FbgFrame>& out);

void write_frames_file(const std::filesystem::path& path, const std::vector<FbgFrame>& frames);

}  // namespace magshape::io

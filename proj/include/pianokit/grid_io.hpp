#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// Binary grid container: 20-byte header followed by a row-major (time-major)
// payload of 32-bit little-endian floats, one per grid cell.
struct GridFileHeader {
    static constexpr std::array<std::uint8_t, 4> kMagic = {'H', 'R', 'T', 'G'};
    static constexpr std::uint32_t kVersion = 1;
    static constexpr size_t kSize = 20;

    std::uint32_t num_frames;
    std::uint32_t num_keys;
    std::uint32_t hop_microseconds; // integer microseconds, e.g. 10 ms -> 10000
};

std::vector<std::uint8_t> write_grid(const RegressionGrid& grid);

// Inverse of write_grid. Payload values within 1e-6 of [0, 1] are clamped in;
// anything further out (or NaN) is an error. Throws ParseError on bad magic,
// version mismatch, truncation or out-of-range values.
RegressionGrid read_grid(std::span<const std::uint8_t> bytes);

// Text alternative: one line per frame, num_keys comma-separated decimals,
// '\n' or '\r\n' line ends. Values get the same range check and are rounded
// to float precision so that CSV and binary forms of a grid decode
// identically.
RegressionGrid read_grid_csv(std::string_view text, double hop_seconds);

// Nine significant digits, enough to reproduce the float payload exactly.
std::string write_grid_csv(const RegressionGrid& grid);

void write_grid_file(const std::filesystem::path& path, const RegressionGrid& grid);
RegressionGrid read_grid_file(const std::filesystem::path& path);

// File names that make up a grid bundle directory.
namespace bundle_files {
inline constexpr const char* kFrame = "frame.hrtg";
inline constexpr const char* kOnset = "onset.hrtg";
inline constexpr const char* kOffset = "offset.hrtg";
inline constexpr const char* kVelocity = "velocity.hrtg";
inline constexpr const char* kPedalFrame = "ped_frame.hrtg";
inline constexpr const char* kPedalOnset = "ped_onset.hrtg";
inline constexpr const char* kPedalOffset = "ped_offset.hrtg";
} // namespace bundle_files

} // namespace pianokit

#include "pianokit/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace pianokit {
namespace {

constexpr double kRangeSlack = 1e-6;

void push_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8 & 0xFF);
    out.push_back(v >> 16 & 0xFF);
    out.push_back(v >> 24 & 0xFF);
}

std::uint32_t read_u32le(std::span<const std::uint8_t> bytes, size_t offset) {
    return static_cast<std::uint32_t>(bytes[offset]) |
           static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
           static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
           static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
}

// Range check shared by the binary and CSV readers: slightly-out values are
// clamped, anything else is refused.
double checked_value(double v, const std::string& where) {
    if (std::isnan(v) || v < -kRangeSlack || v > 1.0 + kRangeSlack) {
        throw ParseError("grid value " + std::to_string(v) + " outside [0, 1] " + where);
    }
    return std::clamp(v, 0.0, 1.0);
}

} // namespace

std::vector<std::uint8_t> write_grid(const RegressionGrid& grid) {
    std::vector<std::uint8_t> out;
    out.reserve(GridFileHeader::kSize + grid.values().size() * 4);
    for (std::uint8_t byte : GridFileHeader::kMagic) out.push_back(byte);
    push_u32le(out, GridFileHeader::kVersion);
    push_u32le(out, static_cast<std::uint32_t>(grid.num_frames()));
    push_u32le(out, static_cast<std::uint32_t>(grid.num_keys()));
    push_u32le(out, static_cast<std::uint32_t>(std::llround(grid.grid().hop_seconds * 1e6)));
    for (double v : grid.values()) {
        push_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

RegressionGrid read_grid(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < GridFileHeader::kSize) {
        throw ParseError("grid header truncated: need " + std::to_string(GridFileHeader::kSize) +
                         " bytes, have " + std::to_string(bytes.size()));
    }
    const auto& magic = GridFileHeader::kMagic;
    if (!std::equal(magic.begin(), magic.end(), bytes.begin())) {
        auto printable = [](std::span<const std::uint8_t> b) {
            std::string s;
            for (std::uint8_t c : b.first(4)) {
                s += (c >= 0x20 && c < 0x7F) ? static_cast<char>(c) : '?';
            }
            return s;
        };
        throw ParseError("bad grid magic: expected \"HRTG\", got \"" + printable(bytes) + "\"");
    }
    const std::uint32_t version = read_u32le(bytes, 4);
    if (version != GridFileHeader::kVersion) {
        throw ParseError("unsupported grid format version " + std::to_string(version) +
                         " (expected " + std::to_string(GridFileHeader::kVersion) + ")");
    }
    const std::uint32_t num_frames = read_u32le(bytes, 8);
    const std::uint32_t num_keys = read_u32le(bytes, 12);
    const std::uint32_t hop_us = read_u32le(bytes, 16);
    if (num_frames == 0 || num_keys == 0 || hop_us == 0) {
        throw ParseError("grid header with zero frames, keys or hop");
    }
    const size_t cells = static_cast<size_t>(num_frames) * num_keys;
    const size_t expected = GridFileHeader::kSize + cells * 4;
    if (bytes.size() != expected) {
        throw ParseError("grid payload truncated: expected " + std::to_string(expected) +
                         " bytes total, have " + std::to_string(bytes.size()));
    }

    std::vector<double> values(cells);
    for (size_t i = 0; i < cells; ++i) {
        const float f =
            std::bit_cast<float>(read_u32le(bytes, GridFileHeader::kSize + i * 4));
        values[i] = checked_value(f, "at cell " + std::to_string(i));
    }
    TimeGrid grid(hop_us * 1e-6, static_cast<int>(num_frames), static_cast<int>(num_keys));
    return RegressionGrid(grid, std::move(values));
}

RegressionGrid read_grid_csv(std::string_view text, double hop_seconds) {
    std::vector<double> values;
    int num_keys = -1;
    int num_frames = 0;
    size_t pos = 0;
    int line_number = 0;
    while (pos < text.size()) {
        ++line_number;
        size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() && pos >= text.size()) break; // trailing newline

        int cells_in_row = 0;
        size_t cell_start = 0;
        while (true) {
            size_t comma = line.find(',', cell_start);
            std::string cell(line.substr(
                cell_start, comma == std::string_view::npos ? line.size() - cell_start
                                                            : comma - cell_start));
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw ParseError("line " + std::to_string(line_number) +
                                 ": non-numeric cell \"" + cell + "\"");
            }
            // Round through float so CSV and binary forms decode identically.
            values.push_back(static_cast<double>(static_cast<float>(
                checked_value(v, "on line " + std::to_string(line_number)))));
            ++cells_in_row;
            if (comma == std::string_view::npos) break;
            cell_start = comma + 1;
        }
        if (num_keys < 0) {
            num_keys = cells_in_row;
        } else if (cells_in_row != num_keys) {
            throw ParseError("line " + std::to_string(line_number) + ": expected " +
                             std::to_string(num_keys) + " values, got " +
                             std::to_string(cells_in_row));
        }
        ++num_frames;
    }
    if (num_frames == 0) {
        throw ParseError("empty CSV grid");
    }
    TimeGrid grid(hop_seconds, num_frames, num_keys);
    return RegressionGrid(grid, std::move(values));
}

std::string write_grid_csv(const RegressionGrid& grid) {
    std::string out;
    char buf[32];
    for (int t = 0; t < grid.num_frames(); ++t) {
        for (int k = 0; k < grid.num_keys(); ++k) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<float>(grid.at(t, k)));
            if (k > 0) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_grid_file(const std::filesystem::path& path, const RegressionGrid& grid) {
    const std::vector<std::uint8_t> bytes = write_grid(grid);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

RegressionGrid read_grid_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string());
    }
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) {
        throw std::runtime_error("failed reading " + path.string());
    }
    try {
        return read_grid(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace pianokit
